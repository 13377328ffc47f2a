"""Optimal step-size schedules from the linear SDP relaxation of the design problem.

For a schedule h and multipliers (lambda, tau) the dual LMI depends on h only
through

    r[i, k] = lambda_i h_k^{(i)} + tau_i * sum_{t=k+1}^{i} h_k^{(t)},

so optimizing over r instead of h gives a linear SDP.  Its solution is mapped
back to step sizes and re-checked with the fixed-schedule dual.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .pep import DualCertificate, multiplier_equalities
from .schedule import StepSchedule
from .sdp import SdpProblem, SdpSolution, SolverConfig, solve

log = logging.getLogger(__name__)


class RecoveryError(RuntimeError):
    def __init__(self, msg, residuals=None):
        super().__init__(msg)
        self.residuals = residuals


def _r_index(N):
    return [(i, k) for i in range(1, N + 1) for k in range(i)]


def build_lin(n: int) -> SdpProblem:
    """Variables: r (row-major over i = 1..N, k < i), lambda_1..N, tau_0..N, t."""
    if n < 1:
        raise ValueError("n must be positive")
    N = n
    dim = N + 2
    idx = _r_index(N)
    nr = len(idx)
    nv = nr + 2 * N + 2

    def entry(pairs):
        rows, cols, vals = zip(*pairs)
        return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))

    coeffs = []
    for i, k in idx:
        coeffs.append(entry([(i, k, 0.5), (k, i, 0.5)]))
    for i in range(1, N + 1):
        # (1/2) (u_{i-1} - u_i)(u_{i-1} - u_i)^T
        coeffs.append(entry([(i - 1, i - 1, 0.5), (i, i, 0.5), (i - 1, i, -0.5), (i, i - 1, -0.5)]))
    for i in range(N + 1):
        coeffs.append(entry([(i, i, 0.5), (i, N + 1, 0.5), (N + 1, i, 0.5)]))
    coeffs.append(entry([(N + 1, N + 1, 0.5)]))
    obj = np.zeros(nv)
    obj[-1] = 0.5
    E, b = multiplier_equalities(N, nr, nr + N, nv)
    names = [f"r_{i},{k}" for i, k in idx] + [f"lambda_{i}" for i in range(1, N + 1)]
    names += [f"tau_{i}" for i in range(N + 1)] + ["t"]
    return SdpProblem(obj, np.zeros((dim, dim)), coeffs, nonneg=range(nr, nr + 2 * N + 1),
                      eq_matrix=E, eq_rhs=b, names=names,
                      eliminate=range(nr + N, nr + 2 * N + 1))


def lin_matrix(r: np.ndarray, lam, tau, t) -> np.ndarray:
    """Bordered matrix [[S(r, lam, tau), tau/2], [tau^T/2, t/2]]; r is (N+1, N+1) lower."""
    lam = np.asarray(lam, dtype=float)
    tau = np.asarray(tau, dtype=float)
    N = lam.size
    S = np.zeros((N + 1, N + 1))
    for i in range(1, N + 1):
        S[i - 1, i - 1] += 0.5 * lam[i - 1]
        S[i, i] += 0.5 * lam[i - 1]
        S[i - 1, i] -= 0.5 * lam[i - 1]
        S[i, i - 1] -= 0.5 * lam[i - 1]
    S += 0.5 * np.diag(tau)
    R = np.tril(r, -1)
    S += 0.5 * (R + R.T)
    out = np.zeros((N + 2, N + 2))
    out[: N + 1, : N + 1] = S
    out[: N + 1, N + 1] = out[N + 1, : N + 1] = 0.5 * tau
    out[N + 1, N + 1] = 0.5 * t
    return out


@dataclass
class LinSolution:
    r: np.ndarray  # (N+1, N+1), r[i, k] for k < i
    lam: np.ndarray
    tau: np.ndarray
    t: float
    sdp: SdpSolution | None = None

    @property
    def n(self) -> int:
        return self.lam.size

    @property
    def factor(self) -> float:
        return 0.5 * self.t

    @property
    def inverse_factor(self) -> float:
        return 1.0 / self.factor

    def certificate(self) -> DualCertificate:
        return DualCertificate(self.lam, self.tau, self.t)

    def matrix(self) -> np.ndarray:
        return lin_matrix(self.r, self.lam, self.tau, self.t)


def solve_lin(n: int, cfg: SolverConfig | None = None) -> LinSolution:
    p = build_lin(n)
    sol = solve(p, cfg)
    if not sol.optimal:
        raise RuntimeError(f"step design SDP for n={n} ended with status {sol.status}: {sol.message}")
    y = sol.vars
    nr = n * (n + 1) // 2
    r = np.zeros((n + 1, n + 1))
    for (i, k), v in zip(_r_index(n), y[:nr]):
        r[i, k] = v
    return LinSolution(r, y[nr:nr + n].copy(), y[nr + n:nr + 2 * n + 1].copy(), float(y[-1]), sol)


def r_from_schedule(s: StepSchedule, lam, tau) -> np.ndarray:
    """The substitution map h -> r for given multipliers."""
    lam = np.asarray(lam, dtype=float)
    tau = np.asarray(tau, dtype=float)
    N = s.n
    cum = s.cumulative()
    r = np.zeros((N + 1, N + 1))
    for i in range(1, N + 1):
        for k in range(i):
            r[i, k] = lam[i - 1] * s.coeff(i, k) + tau[i] * cum[i, k]
    return r


def substitution_residual(s: StepSchedule, sol: LinSolution) -> float:
    d = r_from_schedule(s, sol.lam, sol.tau) - np.tril(sol.r, -1)
    return float(np.abs(d).max(initial=0.0))


def recover_literal(sol: LinSolution, zero_tol: float = 1e-9) -> StepSchedule:
    """h_k^{(i)} = (tau_i sum_{t=k+1}^{i-1} h_k^{(t)} - r_{i,k}) / lambda_i, zero when lambda_i = 0."""
    N = sol.n
    H = np.zeros((N, N))
    for i in range(1, N + 1):
        li = sol.lam[i - 1]
        for k in range(i):
            if abs(li) <= zero_tol:
                continue
            prev = H[k:i - 1, k].sum()  # h_k^{(t)}, t = k+1..i-1
            H[i - 1, k] = (sol.tau[i] * prev - sol.r[i, k]) / li
    return StepSchedule(N, H, f"lin-literal(n={N})")


def recover_forward(sol: LinSolution, zero_tol: float = 1e-9) -> StepSchedule:
    """Forward-substitute r_{i,k} = (lambda_i + tau_i) h_k^{(i)} + tau_i sum_{t<i} h_k^{(t)}.

    Rows with lambda_i = 0 are set to zero, as forced by the zero diagonal.
    """
    N = sol.n
    H = np.zeros((N, N))
    for i in range(1, N + 1):
        if abs(sol.lam[i - 1]) <= zero_tol:
            continue
        diag = sol.lam[i - 1] + sol.tau[i]
        for k in range(i):
            prev = H[k:i - 1, k].sum()
            H[i - 1, k] = (sol.r[i, k] - sol.tau[i] * prev) / diag
    return StepSchedule(N, H, f"lin-optimal(n={N})")


@dataclass
class Recovery:
    schedule: StepSchedule
    path: str  # "literal" or "forward"
    residuals: dict = field(default_factory=dict)


def recover_steps(sol: LinSolution, tol: float = 1e-6) -> Recovery:
    """Try the literal recursive rule first, fall back to the forward solve."""
    res = {}
    lit = recover_literal(sol)
    res["literal"] = substitution_residual(lit, sol)
    if res["literal"] <= tol:
        return Recovery(lit, "literal", res)
    fwd = recover_forward(sol)
    res["forward"] = substitution_residual(fwd, sol)
    if res["forward"] <= tol:
        log.debug("literal recovery residual %.3e, using forward solve", res["literal"])
        return Recovery(fwd, "forward", res)
    raise RecoveryError(
        f"no recovery path reproduces r within {tol:g} (literal {res['literal']:.3e}, "
        f"forward {res['forward']:.3e})",
        res,
    )


@dataclass
class CrosscheckReport:
    lin_factor: float
    schedule_factor: float
    status: str
    tol: float

    @property
    def diff(self) -> float:
        return abs(self.lin_factor - self.schedule_factor)

    @property
    def ok(self) -> bool:
        return self.status == "optimal" and self.diff <= self.tol


def crosscheck(schedule: StepSchedule, sol: LinSolution, cfg: SolverConfig | None = None,
               tol: float = 1e-4) -> CrosscheckReport:
    """Bound the recovered schedule with the fixed-schedule dual and compare."""
    from .bounds import numeric_bound

    rep = numeric_bound(schedule, cfg)
    return CrosscheckReport(sol.factor, rep.factor, rep.status, tol)


def render_schedule(s: StepSchedule, plus_sign: bool = False, digits: int = 4) -> str:
    """One line per step, e.g. ``x_1 <- x_0 - 1.6180/L f'(x_0)``.

    ``plus_sign`` writes the same update as a sum of ``+`` terms with signed
    coefficients, e.g. ``x_1 <- x_0 + (-1.6180)/L f'(x_0)``.
    """
    lines = []
    for i in range(1, s.n + 1):
        terms = []
        for k in range(i):
            h = s.coeff(i, k)
            if plus_sign:
                terms.append(f" + ({-h:.{digits}f})/L f'(x_{k})")
            else:
                terms.append(f" {'-' if h >= 0 else '+'} {abs(h):.{digits}f}/L f'(x_{k})")
        lines.append(f"x_{i} <- x_{i - 1}" + "".join(terms))
    return "\n".join(lines)
