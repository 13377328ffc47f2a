"""Matrices of the performance estimation problem and its dual.

Indices follow the gradient rows g_0..g_N: u_i is the (i+1)-th canonical
vector of R^{N+1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .schedule import StepSchedule
from .sdp import SdpProblem


class MultiplierError(ValueError):
    pass


def _sym_outer(n, a, b):
    """u_a u_b^T + u_b u_a^T in dimension n."""
    M = np.zeros((n, n))
    M[a, b] += 1.0
    M[b, a] += 1.0
    return M


def _diff_outer(n, i, j):
    v = np.zeros(n)
    v[i] += 1.0
    v[j] -= 1.0
    return np.outer(v, v)


def _cross(n, j, w):
    """sum_k w_k (u_j u_k^T + u_k u_j^T)."""
    M = np.zeros((n, n))
    M[j, :] += w
    M[:, j] += w
    return M


def a_tilde(s: StepSchedule, i: int, j: int, cum=None) -> np.ndarray:
    """Constraint matrix of the pair i < j."""
    if not 0 <= i < j <= s.n:
        raise IndexError("need 0 <= i < j <= N")
    c = s.cumulative() if cum is None else cum
    n = s.n + 1
    return 0.5 * _diff_outer(n, i, j) + 0.5 * _cross(n, j, c[j] - c[i])


def b_tilde(s: StepSchedule, i: int, j: int, cum=None) -> np.ndarray:
    """Constraint matrix of the pair j < i."""
    if not 0 <= j < i <= s.n:
        raise IndexError("need 0 <= j < i <= N")
    c = s.cumulative() if cum is None else cum
    n = s.n + 1
    return 0.5 * _diff_outer(n, i, j) - 0.5 * _cross(n, j, c[i] - c[j])


def c_tilde(s: StepSchedule, i: int) -> np.ndarray:
    n = s.n + 1
    M = np.zeros((n, n))
    M[i, i] = 0.5
    return M


def d_tilde(s: StepSchedule, i: int, cum=None) -> np.ndarray:
    c = s.cumulative() if cum is None else cum
    n = s.n + 1
    M = np.zeros((n, n))
    M[i, i] = 0.5
    return M + 0.5 * _cross(n, i, c[i])


@dataclass
class PepMatrices:
    schedule: StepSchedule
    A: dict  # (i, j), i < j
    B: dict  # (i, j), j < i
    C: list
    D: list

    @property
    def n(self) -> int:
        return self.schedule.n

    def chain(self, i: int) -> np.ndarray:
        """A~_{i-1,i}, the only pair matrices the relaxed problem keeps."""
        return self.A[i - 1, i]

    def dump(self, path) -> None:
        """Text export, one matrix per block, row-major with 17 significant digits."""
        with open(path, "w") as fh:
            def block(name, M):
                fh.write(f"# {name}\n")
                for row in M:
                    fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")

            for (i, j), M in sorted(self.A.items()):
                block(f"A {i} {j}", M)
            for (i, j), M in sorted(self.B.items()):
                block(f"B {i} {j}", M)
            for i, M in enumerate(self.C):
                block(f"C {i}", M)
            for i, M in enumerate(self.D):
                block(f"D {i}", M)


def build_constraint_matrices(s: StepSchedule, full: bool = True) -> PepMatrices:
    """All four constraint families; ``full=False`` keeps only the chain pairs."""
    cum = s.cumulative()
    N = s.n
    if full:
        A = {(i, j): a_tilde(s, i, j, cum) for i in range(N + 1) for j in range(i + 1, N + 1)}
        B = {(i, j): b_tilde(s, i, j, cum) for i in range(N + 1) for j in range(i)}
    else:
        A = {(i - 1, i): a_tilde(s, i - 1, i, cum) for i in range(1, N + 1)}
        B = {}
    C = [c_tilde(s, i) for i in range(N + 1)]
    D = [d_tilde(s, i, cum) for i in range(N + 1)]
    return PepMatrices(s, A, B, C, D)


# ---------------------------------------------------------------------------
# multipliers


@dataclass
class DualCertificate:
    lam: np.ndarray  # lambda_1..lambda_N
    tau: np.ndarray  # tau_0..tau_N
    t: float

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float).ravel()
        self.tau = np.asarray(self.tau, dtype=float).ravel()
        self.t = float(self.t)

    @classmethod
    def from_lambda(cls, lam, t) -> "DualCertificate":
        return cls(lam, lambda_to_tau(lam), t)

    @property
    def n(self) -> int:
        return self.lam.size

    @property
    def factor(self) -> float:
        """The bound factor this certificate proves if it is feasible."""
        return 0.5 * self.t

    def to_dict(self) -> dict:
        return {"lambda": self.lam.tolist(), "tau": self.tau.tolist(), "t": self.t}


def lambda_to_tau(lam) -> np.ndarray:
    """tau_0 = lambda_1, tau_i = lambda_{i+1} - lambda_i, tau_N = 1 - lambda_N."""
    lam = np.asarray(lam, dtype=float).ravel()
    return np.diff(np.concatenate([[0.0], lam, [1.0]]))


@dataclass
class MembershipReport:
    equality_residuals: np.ndarray  # index i <-> equality for tau_i
    negative: list  # names of negative components
    min_component: float

    def ok(self, tol: float = 1e-12) -> bool:
        return np.abs(self.equality_residuals).max(initial=0.0) <= tol and self.min_component >= -tol


def check_multiplier_set(cert: DualCertificate, tol: float = 0.0) -> MembershipReport:
    if cert.tau.size != cert.lam.size + 1:
        raise MultiplierError(f"tau has {cert.tau.size} entries for {cert.lam.size} lambdas")
    res = cert.tau - lambda_to_tau(cert.lam)
    neg = [f"lambda_{i + 1}" for i in np.flatnonzero(cert.lam < -tol)]
    neg += [f"tau_{i}" for i in np.flatnonzero(cert.tau < -tol)]
    mins = np.concatenate([cert.lam, cert.tau])
    return MembershipReport(res, neg, float(mins.min()))


def assemble_dual_lmi(m: PepMatrices, cert: DualCertificate, tol: float = 1e-12) -> np.ndarray:
    """The bordered matrix [[sum lam A + sum tau D, tau/2], [tau^T/2, t/2]]."""
    N = m.n
    if cert.lam.size != N:
        raise MultiplierError(f"certificate has {cert.lam.size} multipliers, schedule has {N} steps")
    rep = check_multiplier_set(cert)
    bad = np.flatnonzero(np.abs(rep.equality_residuals) > tol)
    if bad.size:
        raise MultiplierError(f"multiplier equality for tau_{bad[0]} violated by {rep.equality_residuals[bad[0]]:.3e}")
    top = sum(cert.lam[i - 1] * m.chain(i) for i in range(1, N + 1))
    top = top + sum(cert.tau[i] * m.D[i] for i in range(N + 1))
    out = np.zeros((N + 2, N + 2))
    out[: N + 1, : N + 1] = top
    out[: N + 1, N + 1] = 0.5 * cert.tau
    out[N + 1, : N + 1] = 0.5 * cert.tau
    out[N + 1, N + 1] = 0.5 * cert.t
    return out


# ---------------------------------------------------------------------------
# gradient method closed forms


def build_gm_dual_matrices(n: int, lam):
    """(S0, S1, q) for the gradient method dual."""
    lam = np.asarray(lam, dtype=float).ravel()
    if lam.size != n:
        raise ValueError(f"need {n} multipliers, got {lam.size}")
    q = lambda_to_tau(lam)
    diag = np.concatenate([2 * lam, [1.0]])
    S0 = np.diag(diag) - np.diag(lam, 1) - np.diag(lam, -1)
    idx = np.arange(n + 1)
    S1 = q[np.maximum.outer(idx, idx)]
    S1[idx, idx] = diag
    return S0, S1, q


def gm_lemma_matrix(n: int, h: float, lam, t: float) -> np.ndarray:
    """S(lambda, t) = [[(1-h) S0 + h S1, q], [q^T, t]]."""
    S0, S1, q = build_gm_dual_matrices(n, lam)
    out = np.zeros((n + 2, n + 2))
    out[: n + 1, : n + 1] = (1 - h) * S0 + h * S1
    out[: n + 1, n + 1] = q
    out[n + 1, : n + 1] = q
    out[n + 1, n + 1] = t
    return out


# ---------------------------------------------------------------------------
# dual SDP for a fixed schedule


def multiplier_equalities(N: int, offset_lam: int, offset_tau: int, m: int):
    """Rows of tau_0 = lam_1, tau_i = lam_{i+1} - lam_i, lam_N + tau_N = 1."""
    E = np.zeros((N + 1, m))
    b = np.zeros(N + 1)
    for i in range(N + 1):
        E[i, offset_tau + i] = 1.0
        if i >= 1:
            E[i, offset_lam + i - 1] += 1.0  # + lam_i
        if i < N:
            E[i, offset_lam + i] -= 1.0  # - lam_{i+1}
    b[N] = 1.0
    return E, b


def build_dual_sdp(s: StepSchedule) -> SdpProblem:
    """Dual of the relaxed PEP for a fixed schedule.

    Variable order: lambda_1..lambda_N, tau_0..tau_N, t; tau is solved for
    from the multiplier equalities.
    """
    N = s.n
    m = build_constraint_matrices(s, full=False)
    dim = N + 2
    nv = 2 * N + 2
    coeffs = []
    for i in range(1, N + 1):
        F = np.zeros((dim, dim))
        F[: N + 1, : N + 1] = m.chain(i)
        coeffs.append(sp.csr_matrix(F))
    for i in range(N + 1):
        F = np.zeros((dim, dim))
        F[: N + 1, : N + 1] = m.D[i]
        F[i, N + 1] = F[N + 1, i] = 0.5
        coeffs.append(sp.csr_matrix(F))
    F = np.zeros((dim, dim))
    F[N + 1, N + 1] = 0.5
    coeffs.append(sp.csr_matrix(F))
    obj = np.zeros(nv)
    obj[-1] = 0.5
    E, b = multiplier_equalities(N, 0, N, nv)
    names = [f"lambda_{i}" for i in range(1, N + 1)] + [f"tau_{i}" for i in range(N + 1)] + ["t"]
    return SdpProblem(obj, np.zeros((dim, dim)), coeffs, nonneg=range(2 * N + 1),
                      eq_matrix=E, eq_rhs=b, names=names, eliminate=range(N, 2 * N + 1))


def certificate_from_vars(N: int, y) -> DualCertificate:
    y = np.asarray(y)
    return DualCertificate(y[:N], y[N:2 * N + 1], y[2 * N + 1])


def write_matrix(path, M) -> None:
    Path(path).write_text("\n".join(" ".join(f"{v:.17g}" for v in row) for row in M) + "\n")
