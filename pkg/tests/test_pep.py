import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pepkit.bounds import gm_certificate, gm_lambdas
from pepkit.pep import (
    DualCertificate,
    MultiplierError,
    assemble_dual_lmi,
    build_constraint_matrices,
    build_gm_dual_matrices,
    check_multiplier_set,
    gm_lemma_matrix,
    lambda_to_tau,
)
from pepkit.schedule import StepSchedule, fgm_schedule, gm_schedule, hbm_schedule


def _u(n, i):
    v = np.zeros(n)
    v[i] = 1.0
    return v


def _literal_gm(n, h):
    """Gradient-method matrices written term by term with the sums over t."""
    m = n + 1
    u = [_u(m, i) for i in range(m)]

    def sym(a, b):
        return np.outer(a, b) + np.outer(b, a)

    A, B = {}, {}
    for i in range(m):
        for j in range(m):
            base = 0.5 * np.outer(u[i] - u[j], u[i] - u[j])
            if i < j:
                A[i, j] = base + 0.5 * sum(h * sym(u[j], u[t - 1]) for t in range(i + 1, j + 1))
            elif j < i:
                B[i, j] = base - 0.5 * sum(h * sym(u[j], u[t - 1]) for t in range(j + 1, i + 1))
    C = [0.5 * np.outer(u[i], u[i]) for i in range(m)]
    D = [0.5 * np.outer(u[i], u[i]) + 0.5 * sum((h * sym(u[i], u[t - 1]) for t in range(1, i + 1)),
                                                 np.zeros((m, m))) for i in range(m)]
    return A, B, C, D


@pytest.mark.parametrize("h", [0.3, 1.0, 1.7])
@pytest.mark.parametrize("n", [1, 2, 5, 12])
def test_gm_reduces_to_literal_matrices(n, h):
    m = build_constraint_matrices(gm_schedule(n, h))
    A, B, C, D = _literal_gm(n, h)
    for key in A:
        np.testing.assert_allclose(m.A[key], A[key], atol=1e-15)
    for key in B:
        np.testing.assert_allclose(m.B[key], B[key], atol=1e-15)
    for i in range(n + 1):
        np.testing.assert_array_equal(m.C[i], C[i])
        np.testing.assert_allclose(m.D[i], D[i], atol=1e-15)


def test_structural_invariants():
    m = build_constraint_matrices(hbm_schedule(4, 1.0, 0.5))
    for M in [*m.A.values(), *m.B.values(), *m.C, *m.D]:
        np.testing.assert_array_equal(M, M.T)
    for i, M in enumerate(m.C):
        assert M[i, i] == 0.5 and np.count_nonzero(M) == 1
    e = np.zeros((5, 5))
    e[0, 0] = 0.5
    np.testing.assert_array_equal(m.D[0], e)
    assert len(m.A) == len(m.B) == 10


def test_gm_dual_examples():
    lam1 = 0.3
    S0, S1, q = build_gm_dual_matrices(1, [lam1])
    np.testing.assert_allclose(S0, [[2 * lam1, -lam1], [-lam1, 1]])
    np.testing.assert_allclose(S1, [[2 * lam1, 1 - lam1], [1 - lam1, 1]])
    lam = gm_lambdas(2)
    np.testing.assert_allclose(lam, [0.25, 2 / 3])
    np.testing.assert_allclose(build_gm_dual_matrices(2, lam)[2], [0.25, 5 / 12, 1 / 3], rtol=1e-15)


def test_lambda_to_tau():
    np.testing.assert_array_equal(lambda_to_tau(np.zeros(3)), [0, 0, 0, 1])
    rep = check_multiplier_set(DualCertificate.from_lambda([0.5, 0.2], 1.0))
    assert "tau_1" in rep.negative and not rep.ok()
    assert check_multiplier_set(gm_certificate(3, 1.0)).ok()


def test_one_step_entry():
    # off-diagonal of 2 (lam A01 + tau0 D0 + tau1 D1) is h - lam_1
    h, lam1 = 0.8, 0.35
    m = build_constraint_matrices(gm_schedule(1, h), full=False)
    M = 2 * assemble_dual_lmi(m, DualCertificate.from_lambda([lam1], 1.0))
    assert M[0, 1] == pytest.approx(h - lam1, abs=1e-15)
    S0, S1, _ = build_gm_dual_matrices(1, [lam1])
    np.testing.assert_allclose(M[:2, :2], (1 - h) * S0 + h * S1, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 10), h=st.floats(0.0, 2.0), seed=st.integers(0, 10**6),
       t=st.floats(0.0, 5.0))
def test_dual_block_is_lemma_form(n, h, seed, t):
    lam = np.sort(np.random.default_rng(seed).uniform(0, 1, n))
    cert = DualCertificate.from_lambda(lam, t)
    M = assemble_dual_lmi(build_constraint_matrices(gm_schedule(n, h), full=False), cert)
    np.testing.assert_allclose(2 * M, gm_lemma_matrix(n, h, lam, t), atol=1e-13)


def test_theorem_certificate_kernel():
    cert = gm_certificate(1, 1.0)
    assert cert.t == pytest.approx(1 / 3)
    M = assemble_dual_lmi(build_constraint_matrices(gm_schedule(1, 1.0), full=False), cert)
    np.testing.assert_allclose(M @ [1.0, 1.0, -3.0], 0.0, atol=1e-15)


@pytest.mark.parametrize("n,h", [(1, 1.0), (4, 0.5), (9, 0.9)])
def test_kernel_vector_general(n, h):
    S = gm_lemma_matrix(n, h, gm_lambdas(n), 1 / (2 * n * h + 1))
    u = np.ones(n + 2)
    u[-1] = -(2 * n * h + 1)
    np.testing.assert_allclose(S @ u, 0.0, atol=1e-13)
    assert np.linalg.matrix_rank(S, tol=1e-10) == n + 1


def test_zero_lambda_certificate():
    s = fgm_schedule(3)
    cert = DualCertificate.from_lambda(np.zeros(3), 2.0)
    M = assemble_dual_lmi(build_constraint_matrices(s, full=False), cert)
    m = build_constraint_matrices(s)
    np.testing.assert_allclose(M[:4, :4], m.D[3])
    np.testing.assert_allclose(M[:, 4], [0, 0, 0, 0.5, 1.0])


def test_violated_equality_is_named():
    m = build_constraint_matrices(gm_schedule(3, 1.0), full=False)
    cert = gm_certificate(3, 1.0)
    cert.tau[2] += 0.1
    with pytest.raises(MultiplierError, match="tau_2"):
        assemble_dual_lmi(m, cert)
    with pytest.raises(MultiplierError):
        assemble_dual_lmi(m, gm_certificate(2, 1.0))


def test_primal_objective_identity():
    """trace(G^T M G) reproduces the inequality terms for a concrete trajectory."""
    rng = np.random.default_rng(4)
    s = StepSchedule.from_rows([[1.2], [0.3, 0.9], [0.1, -0.2, 1.1]])
    G = rng.standard_normal((4, 3))
    x = np.zeros((4, 3))
    for i in range(1, 4):
        x[i] = x[i - 1] - s.table[i - 1, :i] @ G[:i]
    m = build_constraint_matrices(s)
    for (i, j), M in m.A.items():
        # 1/2 |g_i - g_j|^2 + <g_j, x_i - x_j>
        direct = 0.5 * np.sum((G[i] - G[j]) ** 2) + G[j] @ (x[i] - x[j])
        assert np.sum(M * (G @ G.T)) == pytest.approx(direct, abs=1e-12)
    for (i, j), M in m.B.items():
        direct = 0.5 * np.sum((G[i] - G[j]) ** 2) + G[j] @ (x[i] - x[j])
        assert np.sum(M * (G @ G.T)) == pytest.approx(direct, abs=1e-12)


def test_dump(tmp_path):
    m = build_constraint_matrices(gm_schedule(2, 1.0))
    m.dump(tmp_path / "m.txt")
    text = (tmp_path / "m.txt").read_text()
    assert "# A 0 1" in text and "# D 2" in text
