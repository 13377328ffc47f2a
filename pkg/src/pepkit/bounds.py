"""Worst-case bound factors c with f(x_N) - f* <= c L R^2.

Everything is computed at L = R = 1; the LR^2 scaling is exact.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .pep import (
    DualCertificate,
    assemble_dual_lmi,
    build_constraint_matrices,
    build_dual_sdp,
    build_gm_dual_matrices,
    certificate_from_vars,
    check_multiplier_set,
    gm_lemma_matrix,
)
from .schedule import StepSchedule, gm_schedule
from .sdp import OPTIMAL, SolverConfig, min_eigenvalue, solve
from .simulate import DEFAULT_DIM, phi1_oracle, phi2_oracle, run_fo, unit

ANALYTIC = "analytic"
DUAL_SDP = "dual-sdp"
REFERENCE = "reference"


class BoundRangeError(ValueError):
    pass


@dataclass
class BoundReport:
    factor: float
    source: str
    method: str = ""
    n: int = 0
    params: dict = field(default_factory=dict)
    certificate: DualCertificate | None = None
    status: str = OPTIMAL
    gap: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def inverse_factor(self) -> float:
        return 1.0 / self.factor if self.factor > 0 else float("inf")

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL and np.isfinite(self.factor) and self.factor > 0

    def row(self) -> dict:
        return {
            "method": self.method,
            "n": self.n,
            "parameters": ";".join(f"{k}={v}" for k, v in self.params.items()),
            "factor": self.factor,
            "inverse_factor": self.inverse_factor,
            "source": self.source,
            "status": self.status,
            "gap": self.gap,
        }


# reference constants ---------------------------------------------------------


def classical_gm_factor(n: int) -> float:
    """Textbook rate 1/(2N) for GM with h = 1."""
    return 1.0 / (2 * n)


def nesterov_factor(n: int) -> float:
    """Textbook rate 2/(N+1)^2 for the fast gradient method."""
    return 2.0 / (n + 1) ** 2


def nesterov_lower_reference(n: int) -> float:
    """Resisting-oracle constant 3/(32 (N+1)^2); displayed only, never asserted."""
    return 3.0 / (32 * (n + 1) ** 2)


def initial_point_bound() -> BoundReport:
    """f(x_0) - f* <= L |x_0 - x_*|^2 / 2, i.e. the zero-step bound."""
    return BoundReport(0.5, ANALYTIC, "initial-point", 0)


# gradient method ---------------------------------------------------------------


def gm_lambdas(n: int) -> np.ndarray:
    i = np.arange(1, n + 1)
    return i / (2 * n + 1 - i)


def gm_certificate(n: int, h: float) -> DualCertificate:
    if n < 1:
        raise ValueError("n must be positive")
    return DualCertificate.from_lambda(gm_lambdas(n), 1.0 / (2 * n * h + 1))


def gm_step(s: StepSchedule) -> float | None:
    """h if the schedule is a constant-step gradient method, else None."""
    h = s.table[0, 0]
    return float(h) if np.array_equal(s.table, h * np.eye(s.n)) else None


def analytic_gm_bound(n: int, h: float) -> BoundReport:
    if n < 1:
        raise ValueError("n must be positive")
    if not 0 < h <= 1:
        raise BoundRangeError(f"closed-form bound needs 0 < h <= 1 (got {h}); use numeric_bound")
    return BoundReport(
        1.0 / (4 * n * h + 2), ANALYTIC, "gm", n, {"h": h}, gm_certificate(n, h),
        diagnostics={"classical_factor": classical_gm_factor(n)},
    )


@dataclass
class CertificateReport:
    membership_ok: bool
    negative: list
    lmi_min_eig: float
    factor: float
    tol: float
    kernel_residual: float | None = None
    block_min_eig: float | None = None  # (1-h) S0 + h S1
    theorem_applies: bool | None = None

    @property
    def passed(self) -> bool:
        return self.membership_ok and self.lmi_min_eig >= -self.tol


def verify_certificate(s: StepSchedule, cert: DualCertificate, tol: float = 1e-9) -> CertificateReport:
    if cert.n != s.n:
        raise ValueError(f"certificate has {cert.n} multipliers but schedule has {s.n} steps")
    mem = check_multiplier_set(cert)
    lmi = assemble_dual_lmi(build_constraint_matrices(s, full=False), cert)
    rep = CertificateReport(mem.ok(), mem.negative, min_eigenvalue(lmi), cert.factor, tol)
    h = gm_step(s)
    if h is not None:
        S = gm_lemma_matrix(s.n, h, cert.lam, cert.t)
        u = np.ones(s.n + 2)
        u[-1] = -(2 * s.n * h + 1)
        rep.kernel_residual = float(np.abs(S @ u).max())
        S0, S1, _ = build_gm_dual_matrices(s.n, cert.lam)
        rep.block_min_eig = min_eigenvalue((1 - h) * S0 + h * S1)
        rep.theorem_applies = 0 <= h <= 1
    return rep


# numeric bounds -------------------------------------------------------------------


def numeric_bound(s: StepSchedule, cfg: SolverConfig | None = None) -> BoundReport:
    """Bound factor of a schedule from the dual of its relaxed PEP."""
    sol = solve(build_dual_sdp(s), cfg)
    diag = {"iterations": sol.iterations, "primal_res": sol.primal_res,
            "dual_res": sol.dual_res, "lmi_min_eig": sol.min_eig, "history": sol.history}
    if sol.status != OPTIMAL:
        diag["message"] = (
            f"{sol.message}; the dual has no finite attained optimum for this "
            "schedule, so no bound is certified"
        )
        return BoundReport(float("nan"), DUAL_SDP, s.label, s.n, status=sol.status,
                           gap=sol.gap, diagnostics=diag)
    cert = certificate_from_vars(s.n, sol.vars)
    return BoundReport(sol.objective_value, DUAL_SDP, s.label, s.n, certificate=cert,
                       status=sol.status, gap=sol.gap, diagnostics=diag)


def attained_gm_factors(n: int, h: float, dim: int = DEFAULT_DIM) -> tuple[float, float]:
    """Normalized inaccuracy of GM on the two extremal functions, x_0 at unit distance."""
    x0 = unit(dim)
    s = gm_schedule(n, h)
    a1 = run_fo(phi1_oracle(n, h, dim=dim), s, x0).factor()
    a2 = run_fo(phi2_oracle(dim=dim), s, x0).factor()
    return a1, a2


def conjectured_gm_factor(n: int, h: float) -> float:
    return 0.5 * max(1.0 / (2 * n * h + 1), (1 - h) ** (2 * n))


@dataclass
class ConjectureReport:
    n: int
    h: float
    conjectured: float
    numeric: float
    attained_phi1: float
    attained_phi2: float
    status: str

    @property
    def attained(self) -> float:
        return max(self.attained_phi1, self.attained_phi2)

    @property
    def gap_numeric_vs_conjectured(self) -> float:
        return self.numeric - self.conjectured

    @property
    def gap_numeric_vs_attained(self) -> float:
        return self.numeric - self.attained

    def to_dict(self) -> dict:
        return {
            "n": self.n, "h": self.h, "conjectured": self.conjectured, "numeric": self.numeric,
            "attained_phi1": self.attained_phi1, "attained_phi2": self.attained_phi2,
            "gap_numeric_vs_conjectured": self.gap_numeric_vs_conjectured,
            "gap_numeric_vs_attained": self.gap_numeric_vs_attained, "status": self.status,
        }


def conjecture_explorer(n: int, h: float, cfg: SolverConfig | None = None) -> ConjectureReport:
    """Compare the conjectured tight GM factor with the relaxed dual and with attained values."""
    if not 0 < h < 2:
        raise BoundRangeError("explorer covers 0 < h < 2")
    num = numeric_bound(gm_schedule(n, h), cfg)
    a1, a2 = attained_gm_factors(n, h)
    return ConjectureReport(n, h, conjectured_gm_factor(n, h), num.factor, a1, a2, num.status)


# export ------------------------------------------------------------------------

CSV_COLUMNS = ["method", "n", "parameters", "factor", "inverse_factor", "source", "status", "gap"]


def _fmt(v, digits):
    if isinstance(v, float):
        return f"{v:.{digits}g}"
    return v


def _jsonable(v, digits):
    if isinstance(v, float):
        return float(f"{v:.{digits}g}") if np.isfinite(v) else None
    return v


def write_table(reports, path_or_fh, fmt: str = "csv", digits: int = 10) -> None:
    reports = list(reports)
    rows = [r.row() if isinstance(r, BoundReport) else r for r in reports]
    own = isinstance(path_or_fh, (str, bytes)) or hasattr(path_or_fh, "__fspath__")
    fh = open(path_or_fh, "w", newline="") if own else path_or_fh
    try:
        if fmt == "json":
            json.dump([{k: _jsonable(v, digits) for k, v in r.items()}
                       for r in rows], fh, indent=1, default=str)
            fh.write("\n")
        else:
            if reports and isinstance(reports[0], BoundReport):
                cols = list(CSV_COLUMNS)
            else:
                cols = []
                for r in rows:
                    cols += [k for k in r if k not in cols]
            w = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
            w.writeheader()
            for r in rows:
                w.writerow({k: _fmt(v, digits) for k, v in r.items()})
    finally:
        if own:
            fh.close()
