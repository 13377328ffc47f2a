"""Numeric checks of the positive definiteness argument for S0 and S1.

S1's leading principal minors have the bordered form

    M_k = [[d_0, a_1, a_2, ..., a_k],
           [a_1, d_1, a_2, ..., a_k],
           ...
           [a_k, a_k, ...,      d_k]]

whose determinants satisfy a three-term recursion with an explicit
solution.  Symbols here (a, d, f, g, x, y) are local to this module and
unrelated to iterates or gradients elsewhere in the package.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .bounds import gm_lambdas
from .pep import build_gm_dual_matrices
from .sdp import min_eigenvalue

PD_H_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass
class MinorSequenceSpec:
    n: int
    a: np.ndarray  # a[0] unused, a[1..N]
    d: np.ndarray  # d[0..N]

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.d = np.asarray(self.d, dtype=float)
        if self.a.shape != (self.n + 1,) or self.d.shape != (self.n + 1,):
            raise ValueError("a and d need N+1 entries")
        if np.any(self.a[1:] == 0):
            raise ZeroDivisionError(f"a_{int(np.flatnonzero(self.a[1:] == 0)[0]) + 1} is zero")

    @classmethod
    def for_s1(cls, n: int) -> "MinorSequenceSpec":
        """The choice that makes M_k the (k+1)-th leading minor of S1."""
        if n < 1:
            raise ValueError("n must be positive")
        i = np.arange(n + 1, dtype=float)
        d = 2 * (i + 1) / (2 * n - i + (i == n))  # guard the division at i = N
        d[n] = 1.0
        a = np.zeros(n + 1)
        a[1:n] = (i[1:n] + 1) / (2 * n - i[1:n]) - i[1:n] / (2 * n + 1 - i[1:n])
        a[n] = 1.0 / (n + 1)
        return cls(n, a, d)

    def matrix(self, k: int) -> np.ndarray:
        """M_k assembled explicitly."""
        idx = np.arange(k + 1)
        M = self.a[np.maximum.outer(idx, idx)]
        M[idx, idx] = self.d[: k + 1]
        return M

    # recursion coefficients, straight from a and d
    def alpha(self, k: int) -> float:
        a, d = self.a, self.d
        return d[k] - 2 * a[k] ** 2 / a[k - 1] + a[k] ** 2 * d[k - 1] / a[k - 1] ** 2

    def beta(self, k: int) -> float:
        a, d = self.a, self.d
        return a[k] ** 2 * (1 - d[k - 1] / a[k - 1]) ** 2

    # closed-form helpers, valid for 0 <= i <= N-1
    def f(self, i):
        N = self.n
        return (2 * N + 1) ** 2 / (2 * N - i) ** 2

    def g(self, i):
        return 2 * self.n - 2 * i - 1

    def x(self, i):
        N = self.n
        return 1.0 / (2 * N + 4 * N * i - 2 * i * i + 1)

    def y(self, i):
        N = self.n
        return (2 * N + 4 * N * i - 2 * i * i + 1) / (2 * N + 1 - i) ** 2


def alpha_closed(n: int, k: int) -> float:
    N = n
    if k < N:
        return 4 * ((2 * N + 1) * k - k * k - 1) / (2 * N - k) ** 2
    return 3 * (2 * N * N + 2 * N - 1) / (2 * N + 1) ** 2


def beta_closed(n: int, k: int) -> float:
    N = n
    if k < N:
        return (4 * k * N - 2 * N - 2 * k * k + 4 * k - 1) ** 2 / ((2 * N - k) ** 2 * (2 * N - k + 1) ** 2)
    return (2 * N * N + 2 * N - 1) ** 2 / ((N + 1) ** 2 * (2 * N + 1) ** 2)


def det_recursion(spec: MinorSequenceSpec, k: int) -> float:
    """det M_k from the three-term recursion with det M_0 = d_0, det M_1 = d_0 d_1 - a_1^2."""
    if not 0 <= k <= spec.n:
        raise ValueError(f"k must lie in [0, {spec.n}]")
    a, d = spec.a, spec.d
    if k == 0:
        return float(d[0])
    prev2, prev = d[0], d[0] * d[1] - a[1] ** 2
    for j in range(2, k + 1):
        prev2, prev = prev, spec.alpha(j) * prev - spec.beta(j) * prev2
    return float(prev)


def closed_form_det(n: int, k: int) -> float:
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}]")
    N = n
    factors = closed_form_factors(n)
    if k == N:
        return float((2 * N + 1) ** 2 / (N + 1) ** 2 * np.prod(factors / (2 * N + 1 - np.arange(N)) ** 2))
    i = np.arange(k + 1)
    fk = factors[: k + 1]
    s = np.sum((2 * N - 2 * k - 1) / fk)
    return float((2 * N + 1) ** 2 / (2 * N - k) ** 2 * (1 + s) * np.prod(fk / (2 * N + 1 - i) ** 2))


def closed_form_factors(n: int) -> np.ndarray:
    """2N + 4Ni - 2i^2 + 1 for i = 0..N-1."""
    i = np.arange(n, dtype=float)
    return 2 * n + 4 * n * i - 2 * i * i + 1


def direct_det(spec: MinorSequenceSpec, k: int) -> float:
    return float(np.linalg.det(spec.matrix(k)))


def s1_matrix(n: int) -> np.ndarray:
    return build_gm_dual_matrices(n, gm_lambdas(n))[1]


def s0_matrix(n: int) -> np.ndarray:
    return build_gm_dual_matrices(n, gm_lambdas(n))[0]


def s0_quadratic_form(n: int, x) -> tuple[float, float]:
    """(x^T S0 x, sum of squares form) for the gradient-method multipliers."""
    x = np.asarray(x, dtype=float)
    lam = gm_lambdas(n)
    lhs = float(x @ s0_matrix(n) @ x)
    rhs = np.sum(lam * np.diff(x) ** 2) + lam[0] * x[0] ** 2
    rhs += np.sum(np.diff(lam) * x[1:n] ** 2) + (1 - lam[-1]) * x[n] ** 2
    return lhs, float(rhs)


def s0_quadratic_identity(n: int, trials: int = 100, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        lhs, rhs = s0_quadratic_form(n, rng.standard_normal(n + 1))
        worst = max(worst, abs(lhs - rhs))
    return worst


@dataclass
class IdentityCheck:
    identity: str
    N: int
    k: int
    residual: float
    passed: bool

    def __post_init__(self):
        self.N, self.k = int(self.N), int(self.k)
        self.residual, self.passed = float(self.residual), bool(self.passed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _rel(u, v):
    return abs(u - v) / max(1.0, abs(u), abs(v))


def _strict_rel(u, v):
    scale = max(abs(u), abs(v))
    return abs(u - v) / scale if scale > 0 else 0.0


def determinant_checks(max_n: int = 20, tol: float = 1e-9) -> list[IdentityCheck]:
    """Recursion, closed form and direct determinant, pairwise, for every N and k."""
    out = []
    for N in range(1, max_n + 1):
        spec = MinorSequenceSpec.for_s1(N)
        for k in range(N + 1):
            r = det_recursion(spec, k)
            c = closed_form_det(N, k)
            dd = direct_det(spec, k)
            res = max(_strict_rel(r, c), _strict_rel(r, dd), _strict_rel(c, dd))
            out.append(IdentityCheck("determinant", N, k, res, res <= tol))
    return out


def verification_identities(max_n: int = 30, tol: float = 1e-10) -> list[IdentityCheck]:
    """The four step identities plus agreement of alpha_k, beta_k with their closed forms."""
    out = []
    for N in range(2, max_n + 1):
        s = MinorSequenceSpec.for_s1(N)
        f, g, x, y = s.f, s.g, s.x, s.y
        for k in range(2, N + 1):
            al, be = s.alpha(k), s.beta(k)
            out.append(IdentityCheck("alpha", N, k, _rel(al, alpha_closed(N, k)), False))
            out.append(IdentityCheck("beta", N, k, _rel(be, beta_closed(N, k)), False))
            lhs1 = al * f(k - 1) * (1 + g(k - 1) * x(k - 1)) - be / y(k - 1) * f(k - 2)
            lhs2 = al * f(k - 1) * g(k - 1) - be / y(k - 1) * f(k - 2) * g(k - 2)
            if k < N:
                rhs1 = f(k) * y(k) * (1 + g(k) * x(k - 1) + g(k) * x(k))
                rhs2 = f(k) * g(k) * y(k)
                names = ("step-constant", "step-sum")
            else:
                rhs1 = (2 * N + 1) ** 2 / (N + 1) ** 2
                rhs2 = 0.0
                names = ("final-constant", "final-sum")
            out.append(IdentityCheck(names[0], N, k, _rel(lhs1, rhs1), False))
            out.append(IdentityCheck(names[1], N, k, _rel(lhs2, rhs2), False))
    for c in out:
        c.passed = bool(c.residual <= tol)
    return out


def factor_positivity(max_n: int = 200) -> list[IdentityCheck]:
    out = []
    for N in range(1, max_n + 1):
        fac = closed_form_factors(N)
        out.append(IdentityCheck("factor-positive", N, int(np.argmin(fac)), float(fac.min()), bool(fac.min() > 0)))
    return out


@dataclass
class PdRow:
    n: int
    min_eig_s0: float
    min_eig_s1: float
    combos: dict = field(default_factory=dict)  # h -> min eigenvalue
    raw: dict = field(default_factory=dict)  # h outside [0, 1], reported only

    @property
    def passed(self) -> bool:
        return self.min_eig_s0 > 0 and self.min_eig_s1 > 0 and all(v > 0 for v in self.combos.values())


def pd_suite(max_n: int = 200, h_grid=PD_H_GRID, extra_h=()) -> list[PdRow]:
    """Min eigenvalues of S0, S1 and (1-h) S0 + h S1 for N = 1..max_n.

    Values of ``extra_h`` outside [0, 1] are recorded in ``raw`` without any
    pass/fail verdict, since the convex combination argument does not cover them.
    """
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    rows = []
    for N in range(1, max_n + 1):
        S0, S1, _ = build_gm_dual_matrices(N, gm_lambdas(N))
        row = PdRow(N, min_eigenvalue(S0), min_eigenvalue(S1))
        for h in h_grid:
            row.combos[h] = min_eigenvalue((1 - h) * S0 + h * S1)
        for h in extra_h:
            target = row.combos if 0 <= h <= 1 else row.raw
            target[h] = min_eigenvalue((1 - h) * S0 + h * S1)
        rows.append(row)
    return rows


def full_report(max_det_n: int = 20, max_identity_n: int = 30, max_pd_n: int = 200,
                s0_trials: int = 100, seed: int = 0) -> list[IdentityCheck]:
    checks = determinant_checks(max_det_n)
    checks += verification_identities(max_identity_n)
    checks += factor_positivity(max_pd_n)
    for N in range(1, max_det_n + 1):
        r = s0_quadratic_identity(N, s0_trials, seed + N)
        checks.append(IdentityCheck("s0-quadratic", N, -1, r, r <= 1e-12))
    for row in pd_suite(max_pd_n):
        checks.append(IdentityCheck("pd", row.n, -1, min(row.min_eig_s0, row.min_eig_s1, *row.combos.values()),
                                    row.passed))
    return checks


def write_report(checks, path) -> None:
    with open(path, "w") as fh:
        json.dump([c.to_dict() for c in checks], fh, indent=1)
        fh.write("\n")
