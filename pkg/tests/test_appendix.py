import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pepkit.appendix_verify import (
    MinorSequenceSpec,
    closed_form_det,
    closed_form_factors,
    det_recursion,
    determinant_checks,
    direct_det,
    factor_positivity,
    full_report,
    pd_suite,
    s0_quadratic_form,
    s0_quadratic_identity,
    s1_matrix,
    verification_identities,
    write_report,
)


@pytest.mark.parametrize("N", [2, 3, 7, 20])
def test_base_cases(N):
    s = MinorSequenceSpec.for_s1(N)
    assert det_recursion(s, 0) == pytest.approx(1 / N, rel=1e-15)
    m1 = (28 * N * N - 20 * N - 1) / (4 * N * N * (2 * N - 1) ** 2)
    assert det_recursion(s, 1) == pytest.approx(m1, rel=1e-14)
    assert closed_form_det(N, 1) == pytest.approx(m1, rel=1e-14)


def test_minors_are_leading_blocks_of_s1():
    for N in (1, 4, 9):
        s = MinorSequenceSpec.for_s1(N)
        S1 = s1_matrix(N)
        for k in range(N + 1):
            np.testing.assert_allclose(s.matrix(k), S1[: k + 1, : k + 1], rtol=1e-15, atol=1e-15)


@given(N=st.integers(1, 20), data=st.data())
def test_three_way_agreement(N, data):
    k = data.draw(st.integers(0, N))
    s = MinorSequenceSpec.for_s1(N)
    r, c, d = det_recursion(s, k), closed_form_det(N, k), direct_det(s, k)
    assert r == pytest.approx(c, rel=1e-9)
    assert r == pytest.approx(d, rel=1e-9)


def test_final_minor_structure():
    for N in (1, 5, 12):
        y = closed_form_factors(N) / (2 * N + 1 - np.arange(N)) ** 2
        assert closed_form_det(N, N) == pytest.approx((2 * N + 1) ** 2 / (N + 1) ** 2 * np.prod(y), rel=1e-14)
        assert np.all(y > 0)


def test_one_step_s1():
    S1 = s1_matrix(1)
    np.testing.assert_allclose(S1, [[1.0, 0.5], [0.5, 1.0]])
    assert np.linalg.det(S1) == pytest.approx(0.75)
    assert closed_form_det(1, 1) == pytest.approx(0.75)


def test_zero_border_is_rejected():
    with pytest.raises(ZeroDivisionError):
        MinorSequenceSpec(2, [0.0, 0.0, 1.0], [1.0, 1.0, 1.0])


def test_s0_identity():
    assert s0_quadratic_identity(3, 100, seed=0) <= 1e-12
    assert s0_quadratic_form(4, np.zeros(5)) == (0.0, 0.0)
    e = np.zeros(5)
    e[-1] = 1.0
    lhs, rhs = s0_quadratic_form(4, e)
    assert lhs == pytest.approx(1.0) and rhs == pytest.approx(1.0)


def test_identities_hold():
    checks = verification_identities(30)
    assert checks and all(c.passed for c in checks)
    names = {c.identity for c in checks}
    assert {"step-constant", "step-sum", "final-constant", "final-sum", "alpha", "beta"} <= names


def test_every_factor_positive():
    assert all(c.passed for c in factor_positivity(200))


def test_determinant_grid():
    checks = determinant_checks(20)
    assert len(checks) == sum(N + 1 for N in range(1, 21))
    assert max(c.residual for c in checks) <= 1e-9


def test_pd_suite():
    rows = pd_suite(200)
    assert len(rows) == 200 and all(r.passed for r in rows)
    row = pd_suite(3, extra_h=(1.5, -0.2, 0.6))[2]
    assert set(row.raw) == {1.5, -0.2}
    assert 0.6 in row.combos
    with pytest.raises(ValueError):
        pd_suite(0)


def test_report_json(tmp_path):
    checks = full_report(max_det_n=4, max_identity_n=5, max_pd_n=5, s0_trials=5)
    write_report(checks, tmp_path / "r.json")
    doc = json.loads((tmp_path / "r.json").read_text())
    assert set(doc[0]) == {"identity", "N", "k", "residual", "pass"}
    assert all(d["pass"] for d in doc)
