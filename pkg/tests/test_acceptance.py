"""Acceptance criteria, one test each, with one PASS/FAIL line printed per criterion.

Run directly (``python3 tests/test_acceptance.py``) for the summary alone.
"""

import sys

import numpy as np
import pytest

from pepkit.appendix_verify import (
    closed_form_det,
    det_recursion,
    direct_det,
    pd_suite,
    MinorSequenceSpec,
    s0_quadratic_identity,
)
from pepkit.bounds import attained_gm_factors, gm_certificate, initial_point_bound, numeric_bound, verify_certificate
from pepkit.schedule import fgm_schedule, gm_schedule, hbm_schedule
from pepkit.simulate import random_quadratic_oracle, run_fgm_native, run_fo
from pepkit.stepopt import crosscheck, recover_steps, solve_lin

TABLE_N = [1, 2, 3, 4, 5, 10, 20, 40]
HBM_REF = [6.00, 7.99, 9.00, 12.35, 16.41, 39.63, 89.45, 188.99]
FGM_MAIN_REF = [6.00, 10.00, 15.13, 21.35, 28.66, 81.07, 263.65, 934.89]
FGM_AUX_REF = [2.00, 6.00, 11.13, 17.35, 24.66, 77.07, 259.65, 930.89]
LIN_REF = [8.00, 16.16, 26.53, 39.09, 53.80, 159.07, 525.09, 1869.22]
OPT5_REF = [
    [1.6180],
    [0.1741, 2.0194],
    [0.0756, 0.4425, 2.2317],
    [0.0401, 0.2350, 0.6541, 2.3656],
    [0.0178, 0.1040, 0.2894, 0.6043, 2.0778],
]
REL = 5e-3


def _report(label, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    sys.__stdout__.write(line + "\n")
    sys.__stdout__.flush()
    return ok


def _rel(a, b):
    return abs(a - b) / abs(b)


def criterion_1():
    worst_gap, worst_eig = 0.0, np.inf
    for n in range(1, 26):
        for h in (0.1, 0.25, 0.5, 0.75, 1.0):
            s = gm_schedule(n, h)
            r = numeric_bound(s)
            if not r.ok:
                return False, f"solver status {r.status} at n={n} h={h}"
            worst_gap = max(worst_gap, abs(r.factor - 1 / (4 * n * h + 2)))
            cert = verify_certificate(s, gm_certificate(n, h))
            if not cert.membership_ok:
                return False, f"certificate outside the multiplier set at n={n} h={h}"
            worst_eig = min(worst_eig, cert.lmi_min_eig)
    ok = worst_gap <= 1e-5 and worst_eig >= -1e-9
    return ok, f"max |numeric - 1/(4nh+2)| = {worst_gap:.2e} (tol 1e-5), min LMI eig = {worst_eig:.2e} (tol -1e-9)"


def criterion_2():
    worst, slack = 0.0, np.inf
    for h in (0.5, 1.0, 1.5):
        for n in range(1, 51):
            a1, a2 = attained_gm_factors(n, h)
            worst = max(worst, abs(a1 - 1 / (4 * n * h + 2)), abs(a2 - 0.5 * (1 - h) ** (2 * n)))
            num = numeric_bound(gm_schedule(n, h))
            if not num.ok:
                return False, f"solver status {num.status} at n={n} h={h}"
            slack = min(slack, num.factor + 1e-7 - max(a1, a2))
    ok = worst <= 1e-12 and slack >= 0
    return ok, f"max attainment error = {worst:.2e} (tol 1e-12), min (numeric + 1e-7 - attained) = {slack:.2e}"


def criterion_3():
    worst = 0.0
    bad = []
    for n, hb, fm, fa in zip(TABLE_N, HBM_REF, FGM_MAIN_REF, FGM_AUX_REF):
        got_h = numeric_bound(hbm_schedule(n, 1.0, 0.5)).inverse_factor
        got_m = numeric_bound(fgm_schedule(n, "main")).inverse_factor
        got_a = initial_point_bound().inverse_factor if n == 1 else numeric_bound(fgm_schedule(n, "aux")).inverse_factor
        for name, got, ref in (("hbm", got_h, hb), ("fgm-main", got_m, fm), ("fgm-aux", got_a, fa)):
            e = _rel(got, ref)
            worst = max(worst, e)
            if e > REL:
                bad.append(f"{name} n={n}: {got:.4f} vs {ref}")
    return not bad, f"max relative error = {worst:.2e} (tol 5e-3)" + (f"; off: {bad}" if bad else "")


def criterion_4():
    worst = 0.0
    bad = []
    for n, ref in zip(TABLE_N, LIN_REF):
        got = solve_lin(n).inverse_factor
        e = _rel(got, ref)
        worst = max(worst, e)
        if e > REL:
            bad.append(f"n={n}: {got:.4f} vs {ref}")
    return not bad, f"max relative error = {worst:.2e} (tol 5e-3)" + (f"; off: {bad}" if bad else "")


def criterion_5():
    sol = solve_lin(5)
    rec = recover_steps(sol)
    coeff_err = max(abs(abs(v) - r) for row, ref in zip(rec.schedule.rows, OPT5_REF) for v, r in zip(row, ref))
    cc = crosscheck(rec.schedule, sol)
    ok = coeff_err <= 2e-3 and cc.ok and cc.diff <= 1e-4
    return ok, (f"max coefficient magnitude error = {coeff_err:.2e} (tol 2e-3), "
                f"crosscheck |diff| = {cc.diff:.2e} (tol 1e-4), recovery path = {rec.path}")


def criterion_6():
    det_err = 0.0
    for N in range(1, 21):
        spec = MinorSequenceSpec.for_s1(N)
        for k in range(N + 1):
            r, c, d = det_recursion(spec, k), closed_form_det(N, k), direct_det(spec, k)
            det_err = max(det_err, _rel(r, c), _rel(r, d), _rel(c, d))
    s0_err = max(s0_quadratic_identity(N, 100, seed=N) for N in range(1, 21))
    rows = pd_suite(200)
    min_eig = min(min(r.min_eig_s0, r.min_eig_s1) for r in rows)
    ok = det_err <= 1e-9 and s0_err <= 1e-12 and min_eig > 0 and all(r.passed for r in rows)
    return ok, (f"determinant triple agreement {det_err:.2e} (tol 1e-9), S0 identity {s0_err:.2e} "
                f"(tol 1e-12), min eig of S0/S1 over N<=200 = {min_eig:.3e}")


def criterion_7():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 9))
        n = int(rng.integers(1, 16))
        seed = int(rng.integers(2**31))
        o = random_quadratic_oracle(d, 1.0, seed)
        x0 = np.random.default_rng(seed).standard_normal(d)
        nat = run_fgm_native(o, n, x0)
        tr = run_fo(o, fgm_schedule(n, "main"), x0)
        scale = max(1.0, np.abs(nat.x).max())
        worst = max(worst, np.abs(tr.points[-1] - nat.x[-1]).max() / scale)
        if n >= 2:
            aux = run_fo(o, fgm_schedule(n, "aux"), x0)
            worst = max(worst, np.abs(aux.points - nat.y).max() / scale)
    return worst <= 1e-8, f"max relative trajectory mismatch = {worst:.2e} (tol 1e-8)"


CRITERIA = [
    ("C1 gradient method bound and certificate", criterion_1),
    ("C2 gradient method tightness", criterion_2),
    ("C3 heavy ball and fast gradient table", criterion_3),
    ("C4 optimal step-size table", criterion_4),
    ("C5 optimal 5-step schedule", criterion_5),
    ("C6 positive definiteness suite", criterion_6),
    ("C7 fast gradient schedule equivalence", criterion_7),
]


@pytest.mark.parametrize("label,fn", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(label, fn):
    ok, detail = fn()
    _report(label, ok, detail)
    assert ok, detail


def test_c8_documented_exclusions():
    _report("C8 large-n rows and conjectures", True,
            "excluded from gating by definition; see scripts/conjecture_scan.py for the gap reports")
    pytest.skip("documentation-only criterion")


if __name__ == "__main__":
    results = []
    for label, fn in CRITERIA:
        ok, detail = fn()
        results.append(_report(label, ok, detail))
    sys.exit(0 if all(results) else 1)
