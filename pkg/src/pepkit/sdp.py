"""Dense primal-dual interior-point solver for single-LMI problems.

Solves

    minimize    c^T y
    subject to  F0 + sum_j y_j F_j  >= 0      (positive semidefinite)
                y_j >= 0                     for j in ``nonneg``
                A_eq y = b_eq

Equalities are eliminated up front by solving for a set of dependent variables.
Sign constraints become a diagonal (linear) block of the same conic
constraint.  The iteration is an infeasible-start HKM path-following
method with Mehrotra predictor-corrector steps.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
MAX_ITERATIONS = "max_iterations"


class SdpError(ValueError):
    """Malformed problem data."""


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-8
    max_iter: int = 200
    verbose: bool = False
    infeas_tol: float = 1e-8

    @classmethod
    def from_env(cls, **overrides) -> "SolverConfig":
        """Read ``PEPKIT_TOL``, ``PEPKIT_MAX_ITER`` and ``PEPKIT_VERBOSE``."""
        kw = {}
        if "PEPKIT_TOL" in os.environ:
            kw["tol"] = float(os.environ["PEPKIT_TOL"])
        if "PEPKIT_MAX_ITER" in os.environ:
            kw["max_iter"] = int(os.environ["PEPKIT_MAX_ITER"])
        if "PEPKIT_VERBOSE" in os.environ:
            kw["verbose"] = os.environ["PEPKIT_VERBOSE"] not in ("", "0", "false")
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)


@dataclass
class SdpProblem:
    """Linear objective, one affine LMI, optional signs and equalities.

    ``coeffs[j]`` is the symmetric matrix multiplying variable ``j``; it may
    be a dense array or any scipy sparse matrix.
    """

    objective: np.ndarray
    constant: np.ndarray
    coeffs: Sequence
    nonneg: Sequence[int] = ()
    eq_matrix: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None
    names: Sequence[str] | None = None
    eliminate: Sequence[int] | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        self.constant = np.asarray(self.constant, dtype=float)
        n = self.constant.shape[0]
        if self.constant.shape != (n, n):
            raise SdpError("constant term must be square")
        if not np.allclose(self.constant, self.constant.T, atol=1e-12):
            raise SdpError("constant term is not symmetric")
        if len(self.coeffs) != self.objective.size:
            raise SdpError(
                f"{len(self.coeffs)} coefficient matrices for "
                f"{self.objective.size} objective entries"
            )
        for j, F in enumerate(self.coeffs):
            if F.shape != (n, n):
                raise SdpError(f"coefficient {j} has shape {F.shape}, expected {(n, n)}")
            asym = abs(F - F.T)
            asym = asym.max() if asym.size else 0.0
            if asym > 1e-12:
                raise SdpError(f"coefficient {j} is not symmetric")
        self.nonneg = sorted(set(int(j) for j in self.nonneg))
        if self.nonneg and not 0 <= self.nonneg[0] <= self.nonneg[-1] < self.num_vars:
            raise SdpError("sign constraint index out of range")
        if (self.eq_matrix is None) != (self.eq_rhs is None):
            raise SdpError("eq_matrix and eq_rhs must be given together")
        if self.eq_matrix is not None:
            self.eq_matrix = np.atleast_2d(np.asarray(self.eq_matrix, dtype=float))
            self.eq_rhs = np.asarray(self.eq_rhs, dtype=float).ravel()
            if self.eq_matrix.shape != (self.eq_rhs.size, self.num_vars):
                raise SdpError("equality data has inconsistent shape")

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def dim(self) -> int:
        return self.constant.shape[0]

    def lmi(self, y) -> np.ndarray:
        """Evaluate F0 + sum_j y_j F_j."""
        M = self.constant.copy()
        for yj, F in zip(np.asarray(y, dtype=float), self.coeffs):
            if yj != 0.0:
                M += yj * (F.toarray() if sp.issparse(F) else F)
        return M


@dataclass
class SdpSolution:
    vars: np.ndarray
    objective_value: float
    status: str
    primal_res: float
    dual_res: float
    gap: float
    iterations: int
    min_eig: float
    dual_matrix: np.ndarray | None = None
    history: list = field(default_factory=list)
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def residuals(self) -> dict:
        return {"primal": self.primal_res, "dual": self.dual_res, "gap": self.gap}

    def write_log(self, path) -> None:
        """Iteration log as CSV: iteration, gap, primal_res, dual_res."""
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "gap", "primal_res", "dual_res"])
            for row in self.history:
                w.writerow([row[0], f"{row[1]:.6e}", f"{row[2]:.6e}", f"{row[3]:.6e}"])


def min_eigenvalue(M) -> float:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, np.abs(M).max()) if M.size else 1.0
    if np.abs(M - M.T).max(initial=0.0) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])


def is_psd(M, tol: float = 1e-9) -> bool:
    return min_eigenvalue(M) >= -tol


# ---------------------------------------------------------------------------
# internal representation


@dataclass
class _Coo:
    """Symmetric coefficient matrices as one flat triplet list."""

    var: np.ndarray
    row: np.ndarray
    col: np.ndarray
    val: np.ndarray
    m: int
    n: int

    @classmethod
    def from_stack(cls, stack, n):
        C = sp.coo_matrix(stack)
        C.sum_duplicates()
        keep = C.data != 0.0
        flat = C.col[keep].astype(int)
        return cls(C.row[keep].astype(int), flat // n, flat % n, C.data[keep].astype(float),
                   stack.shape[0], n)

    def apply(self, y):
        """sum_j y_j F_j as a dense matrix."""
        out = np.zeros((self.n, self.n))
        np.add.at(out, (self.row, self.col), self.val * y[self.var])
        return out

    def adjoint(self, X):
        """(<F_j, X>)_j."""
        return np.bincount(self.var, weights=self.val * X[self.row, self.col], minlength=self.m)

    def incidence(self):
        return sp.csr_matrix((self.val, (self.var, np.arange(self.var.size))), shape=(self.m, self.var.size))


def _schur_lmi(coo: _Coo, B, X, Sinv, chunk=2048):
    """M_ij = tr(F_i X F_j S^{-1}) using the triplet form."""
    m = coo.m
    M = np.zeros((m, m))
    E = coo.var.size
    p, q = coo.row, coo.col
    for start in range(0, E, chunk):
        sl = slice(start, min(E, start + chunk))
        # K[e, e'] = X[q_e, p_e'] * Sinv[q_e', p_e]
        K = X[np.ix_(q, p[sl])] * Sinv[np.ix_(p, q[sl])]
        M += (B[:, sl] @ (B @ K).T).T
    return 0.5 * (M + M.T)


def _schur_dense(Fstack, X, Sinv):
    """Same as _schur_lmi for an (m, n, n) dense stack."""
    m = Fstack.shape[0]
    P = np.matmul(np.matmul(X, Fstack), Sinv)
    M = Fstack.reshape(m, -1) @ P.reshape(m, -1).T
    return 0.5 * (M + M.T)


def _max_step(X, dX):
    """Largest alpha with X + alpha dX PSD (X positive definite)."""
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        return 0.0
    Li = sla.solve_triangular(L, np.eye(X.shape[0]), lower=True)
    W = Li @ dX @ Li.T
    lam = np.linalg.eigvalsh(0.5 * (W + W.T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _max_step_lp(x, dx):
    neg = dx < 0
    if not neg.any():
        return np.inf
    return float(np.min(-x[neg] / dx[neg]))


def _stack(mats, n):
    """Coefficient matrices as one sparse (m, n*n) array."""
    rows = [sp.csr_matrix(F).reshape(1, n * n) for F in mats]
    return sp.vstack(rows, format="csr") if rows else sp.csr_matrix((0, n * n))


def _pick_dependent(A):
    """Columns of a maximal nonsingular square block, by pivoted QR."""
    _, R, piv = sla.qr(A, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    rank = int(np.sum(d > 1e-10 * max(1.0, d.max(initial=0.0))))
    return np.sort(piv[:rank]), rank


def _reduce(p: SdpProblem):
    """Eliminate equalities; return (c, F0, coo, g0, G, y0, N, cconst).

    Variables in ``p.eliminate`` (or a pivoted choice) are solved for, so
    y = y0 + N z with z the remaining free variables and N sparse whenever
    the equality block is.
    """
    n, m = p.dim, p.num_vars
    mats = list(p.coeffs)
    if p.eq_matrix is None:
        y0 = np.zeros(m)
        N = None
        c = p.objective
        F0 = p.constant.copy()
        red = _stack(mats, n)
        G = np.zeros((len(p.nonneg), m))
        G[np.arange(len(p.nonneg)), p.nonneg] = 1.0
        g0 = np.zeros(len(p.nonneg))
    else:
        A, b = p.eq_matrix, p.eq_rhs
        if p.eliminate is not None:
            dep = np.asarray(sorted(p.eliminate), dtype=int)
            rows = np.arange(A.shape[0])
        else:
            dep, rank = _pick_dependent(A)
            rows = _pick_dependent(A.T)[0]
        Ad = A[np.ix_(rows, dep)]
        if Ad.shape[0] != Ad.shape[1] or np.linalg.matrix_rank(Ad) < Ad.shape[0]:
            raise SdpError("eliminated variables do not form a nonsingular block")
        free = np.setdiff1d(np.arange(m), dep)
        Af = A[np.ix_(rows, free)]
        yd = np.linalg.solve(Ad, b[rows])
        Nd = -np.linalg.solve(Ad, Af)
        Nd[np.abs(Nd) < 1e-15] = 0.0
        y0 = np.zeros(m)
        y0[dep] = yd
        if np.linalg.norm(A @ y0 - b) > 1e-9 * (1 + np.linalg.norm(b)):
            raise SdpError("equality constraints are inconsistent")
        Nmat = np.zeros((m, free.size))
        Nmat[free, np.arange(free.size)] = 1.0
        Nmat[dep, :] = Nd
        N = Nmat
        c = N.T @ p.objective
        F0 = p.lmi(y0)
        red = (sp.csr_matrix(N.T) @ _stack(mats, n)).tocsr()
        g0 = y0[p.nonneg]
        G = N[p.nonneg, :]
    coo = _Coo.from_stack(red, n)
    cconst = float(p.objective @ y0)
    return c, F0, coo, g0, np.asarray(G, dtype=float), y0, N, cconst


def solve(p: SdpProblem, cfg: SolverConfig | None = None) -> SdpSolution:
    """Minimize the problem; never raises on infeasible or unbounded data."""
    cfg = cfg or SolverConfig()
    c, F0, coo, g0, G, y0, N, cconst = _reduce(p)
    n, m, nl = F0.shape[0], c.size, g0.size

    def lift(z):
        return z if N is None else y0 + N @ z

    if m == 0:
        S = F0
        lam = min_eigenvalue(S) if n else 0.0
        ok = lam >= -cfg.tol and np.all(g0 >= -cfg.tol)
        return SdpSolution(lift(np.zeros(0)), cconst, OPTIMAL if ok else INFEASIBLE,
                           0.0, 0.0, 0.0, 0, lam)

    B = coo.incidence()
    E = coo.var.size
    Fdense = None
    # the triplet gather costs roughly 50x a BLAS flop per entry
    dense_cost = m * n**3 + m * m * n * n
    if E and 50 * E * E > dense_cost and m * n * n < 5e7:
        Fdense = np.zeros((m, n, n))
        np.add.at(Fdense, (coo.var, coo.row, coo.col), coo.val)
    normF0 = np.linalg.norm(F0) + np.linalg.norm(g0)
    normc = np.linalg.norm(c)
    Fnorms = np.sqrt(np.bincount(coo.var, weights=coo.val**2, minlength=m) + (G**2).sum(axis=0))

    xi = max(10.0, np.sqrt(n), (n + nl) * np.max((1 + np.abs(c)) / (1 + Fnorms)))
    eta = max(10.0, np.sqrt(n), normF0, Fnorms.max())
    X = xi * np.eye(n)
    S = eta * np.eye(n)
    x = xi * np.ones(nl)
    s = eta * np.ones(nl)
    y = np.zeros(m)
    nu = n + nl

    history = []
    status = MAX_ITERATIONS
    message = ""
    gamma = 0.9
    it = 0
    rel_p = rel_d = rel_gap = np.inf
    for it in range(1, cfg.max_iter + 1):
        Fy = coo.apply(y)
        Gy = G @ y
        rp = c - coo.adjoint(X) - G.T @ x
        Rd = F0 + Fy - S
        rd = g0 + Gy - s
        pobj = float(c @ y)
        dobj = float(-np.sum(F0 * X) - g0 @ x)
        mu = (np.sum(X * S) + x @ s) / nu
        rel_p = np.linalg.norm(rp) / (1 + normc)
        rel_d = np.sqrt(np.sum(Rd**2) + rd @ rd) / (1 + normF0)
        rel_gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        history.append((it - 1, pobj - dobj, rel_p, rel_d))
        if cfg.verbose:
            log.info("it %3d pobj %+.9e dobj %+.9e gap %.2e pres %.2e dres %.2e",
                     it - 1, pobj, dobj, pobj - dobj, rel_p, rel_d)
        if max(rel_p, rel_d, rel_gap) <= cfg.tol:
            status = OPTIMAL
            break
        # infeasibility certificates
        kappa = dobj
        if kappa > 0 and np.linalg.norm(c - rp) / kappa < cfg.infeas_tol:
            status, message = INFEASIBLE, "dual ray certifies an empty LMI feasible set"
            break
        if pobj < 0 and (np.linalg.norm(F0 + Rd) + np.linalg.norm(g0 + rd)) / -pobj < cfg.infeas_tol:
            status, message = UNBOUNDED, "primal ray drives the objective to -inf"
            break
        if max(np.abs(X).max(initial=0), np.abs(x).max(initial=0), np.abs(y).max()) > 1e14:
            status = INFEASIBLE if kappa > 0 else UNBOUNDED
            message = "iterates diverged"
            break

        try:
            Sinv = sla.cho_solve(sla.cho_factor(S), np.eye(n))
        except np.linalg.LinAlgError:
            message = "slack lost definiteness"
            break
        Sinv = 0.5 * (Sinv + Sinv.T)
        if Fdense is not None:
            M = _schur_dense(Fdense, X, Sinv)
        else:
            M = _schur_lmi(coo, B, X, Sinv) if E else np.zeros((m, m))
        if nl:
            M += G.T @ ((x / s)[:, None] * G)
        try:
            Mf = sla.cho_factor(M)
            msolve = lambda r: sla.cho_solve(Mf, r)  # noqa: E731
        except np.linalg.LinAlgError:
            reg = 1e-14 * max(1.0, np.abs(np.diag(M)).max())
            Mreg = M + reg * np.eye(m)
            msolve = lambda r: np.linalg.lstsq(Mreg, r, rcond=None)[0]  # noqa: E731

        def direction(sigma_mu, W=None, w=None):
            T = sigma_mu * Sinv - X - X @ Rd @ Sinv
            t_l = sigma_mu / s - x - x / s * rd if nl else np.zeros(0)
            if W is not None:
                T = T - W
                t_l = t_l - w
            rhs = coo.adjoint(T) + G.T @ t_l - rp
            dy = msolve(rhs)
            dS = Rd + coo.apply(dy)
            dS = 0.5 * (dS + dS.T)
            Q = X @ dS @ Sinv
            dX = sigma_mu * Sinv - X - 0.5 * (Q + Q.T)
            if W is not None:
                dX = dX - 0.5 * (W + W.T)
            ds = rd + G @ dy
            dx = sigma_mu / s - x - x / s * ds if nl else np.zeros(0)
            if W is not None and nl:
                dx = dx - w
            return dX, dx, dy, dS, ds

        # predictor
        dX, dx, dy, dS, ds = direction(0.0)
        ap = min(1.0, _max_step(X, dX), _max_step_lp(x, dx) if nl else np.inf)
        ad = min(1.0, _max_step(S, dS), _max_step_lp(s, ds) if nl else np.inf)
        mu_aff = (np.sum((X + ap * dX) * (S + ad * dS)) + (x + ap * dx) @ (s + ad * ds)) / nu
        sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.0
        # corrector
        W = dX @ dS @ Sinv
        w = dx * ds / s if nl else None
        dX, dx, dy, dS, ds = direction(sigma * mu, W, w)

        ap = min(1.0, gamma * _max_step(X, dX), gamma * _max_step_lp(x, dx) if nl else np.inf)
        ad = min(1.0, gamma * _max_step(S, dS), gamma * _max_step_lp(s, ds) if nl else np.inf)
        X = X + ap * dX
        X = 0.5 * (X + X.T)
        x = x + ap * dx
        y = y + ad * dy
        S = S + ad * dS
        S = 0.5 * (S + S.T)
        s = s + ad * ds
        gamma = 0.9 + 0.09 * min(ap, ad)
        if ap < 1e-12 and ad < 1e-12:
            message = "step length underflow"
            break

    yfull = lift(y)
    lmi = p.lmi(yfull)
    lam = float(np.linalg.eigvalsh(lmi)[0]) if n else 0.0
    if status == OPTIMAL and p.nonneg:
        lam = min(lam, float(np.min(yfull[p.nonneg])))
    return SdpSolution(
        vars=yfull,
        objective_value=float(c @ y) + cconst,
        status=status,
        primal_res=float(rel_p),
        dual_res=float(rel_d),
        gap=float(rel_gap),
        iterations=it,
        min_eig=lam,
        dual_matrix=X,
        history=history,
        message=message,
    )
