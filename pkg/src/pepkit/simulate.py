"""Function oracles, trajectory runners and checks against the PEP constraints."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .schedule import StepSchedule, fgm_t_sequence

DEFAULT_DIM = 4


class DivergenceError(RuntimeError):
    def __init__(self, step: int, what: str = "value or gradient"):
        super().__init__(f"non-finite {what} at step {step}")
        self.step = step


@dataclass(frozen=True)
class FunctionOracle:
    dim: int
    lipschitz: float
    fn: Callable[[np.ndarray], tuple[float, np.ndarray]]
    minimizer: np.ndarray | None = None
    optimal_value: float | None = None
    name: str = ""
    scale: float = 1.0  # typical distance scale for sampling test points

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))

    def value(self, x) -> float:
        return self(x)[0]

    def grad(self, x) -> np.ndarray:
        return self(x)[1]


def unit(dim: int, i: int = 0) -> np.ndarray:
    e = np.zeros(dim)
    e[i] = 1.0
    return e


def phi1_oracle(n: int, h: float, L: float = 1.0, R: float = 1.0, dim: int = DEFAULT_DIM) -> FunctionOracle:
    """Huber-type worst case for n steps of GM with step h.

    Quadratic (L/2)|x|^2 inside radius R/(2nh+1), affine in |x| outside.
    """
    if n < 1 or h <= 0 or L <= 0 or R <= 0:
        raise ValueError("phi1 needs n >= 1 and h, L, R > 0")
    c = 1.0 / (2 * n * h + 1)
    rho = c * R

    def fn(x):
        r = np.linalg.norm(x)
        if r >= rho:
            return L * R * c * r - 0.5 * L * R**2 * c**2, (L * R * c / r) * x
        return 0.5 * L * r * r, L * x

    return FunctionOracle(dim, L, fn, np.zeros(dim), 0.0, f"phi1(n={n},h={h:g})", R)


def phi2_oracle(L: float = 1.0, dim: int = DEFAULT_DIM) -> FunctionOracle:
    if L <= 0:
        raise ValueError("L must be positive")
    return FunctionOracle(dim, L, lambda x: (0.5 * L * float(x @ x), L * x), np.zeros(dim), 0.0, "phi2")


def quadratic_oracle(Q: np.ndarray, L: float, name: str = "quadratic") -> FunctionOracle:
    Q = np.asarray(Q, dtype=float)
    return FunctionOracle(Q.shape[0], L, lambda x: (0.5 * float(x @ Q @ x), Q @ x),
                          np.zeros(Q.shape[0]), 0.0, name)


def random_quadratic_matrix(dim: int, L: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eig = L * rng.uniform(0.0, 1.0, dim)
    Q = (U * eig) @ U.T
    return 0.5 * (Q + Q.T)


def random_quadratic_oracle(dim: int, L: float = 1.0, seed: int = 0) -> FunctionOracle:
    """f(x) = x^T Q x / 2 with 0 <= eig(Q) <= L, deterministic in seed."""
    if dim < 1 or L <= 0:
        raise ValueError("need dim >= 1 and L > 0")
    return quadratic_oracle(random_quadratic_matrix(dim, L, seed), L, f"quad(d={dim},seed={seed})")


def scaled_gradient(oracle: FunctionOracle, factor: float) -> FunctionOracle:
    """Same values, gradient multiplied by ``factor`` (breaks the oracle)."""

    def fn(x):
        v, g = oracle.fn(x)
        return v, factor * g

    return FunctionOracle(oracle.dim, oracle.lipschitz, fn, oracle.minimizer,
                          oracle.optimal_value, f"{oracle.name}*{factor:g}", oracle.scale)


@dataclass
class Trajectory:
    points: np.ndarray  # (N+1, d)
    values: np.ndarray  # (N+1,)
    grads: np.ndarray  # (N+1, d)
    oracle: FunctionOracle
    schedule: StepSchedule | None = None

    @property
    def n(self) -> int:
        return len(self.values) - 1

    def initial_distance(self) -> float:
        if self.oracle.minimizer is None:
            raise ValueError("oracle has no known minimizer")
        return float(np.linalg.norm(self.oracle.minimizer - self.points[0]))

    def factor(self) -> float:
        """(f(x_N) - f*) / (L |x_* - x_0|^2)."""
        if self.oracle.optimal_value is None:
            raise ValueError("oracle has no known optimal value")
        R = self.initial_distance()
        return (self.values[-1] - self.oracle.optimal_value) / (self.oracle.lipschitz * R**2)

    def reconstruction_residual(self) -> float:
        """Relative mismatch of the recorded points with the schedule recurrence."""
        s = self.schedule
        if s is None:
            raise ValueError("trajectory has no schedule")
        L = self.oracle.lipschitz
        pred = self.points[:-1] - (s.table @ self.grads[:-1]) / L
        scale = 1.0 + np.abs(self.points).max()
        return float(np.abs(pred - self.points[1:]).max() / scale)

    def to_csv(self, path) -> None:
        xs = self.oracle.minimizer
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "value", "gradient_norm", "distance_to_opt"])
            for i in range(self.n + 1):
                dist = "" if xs is None else repr(float(np.linalg.norm(self.points[i] - xs)))
                w.writerow([i, repr(float(self.values[i])), repr(float(np.linalg.norm(self.grads[i]))), dist])


def _eval(oracle, x, step):
    v, g = oracle(x)
    if not np.isfinite(v) or not np.all(np.isfinite(g)):
        raise DivergenceError(step)
    return v, np.asarray(g, dtype=float)


def run_fo(oracle: FunctionOracle, s: StepSchedule, x0) -> Trajectory:
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (oracle.dim,):
        raise ValueError(f"x0 has shape {x0.shape}, oracle dimension is {oracle.dim}")
    L = oracle.lipschitz
    pts = np.empty((s.n + 1, oracle.dim))
    grads = np.empty_like(pts)
    vals = np.empty(s.n + 1)
    pts[0] = x0
    vals[0], grads[0] = _eval(oracle, x0, 0)
    for i in range(1, s.n + 1):
        pts[i] = pts[i - 1] - (s.table[i - 1, :i] @ grads[:i]) / L
        if not np.all(np.isfinite(pts[i])):
            raise DivergenceError(i, "iterate")
        vals[i], grads[i] = _eval(oracle, pts[i], i)
    return Trajectory(pts, vals, grads, oracle, s)


@dataclass
class FgmRun:
    x: np.ndarray  # x_0..x_N
    y: np.ndarray  # y_1..y_N (row 0 is y_1)
    fx: np.ndarray
    fy: np.ndarray


def run_fgm_native(oracle: FunctionOracle, n: int, x0) -> FgmRun:
    """Two-sequence fast gradient method, written out as usually stated."""
    if n < 1:
        raise ValueError("n must be positive")
    L = oracle.lipschitz
    t = fgm_t_sequence(n + 1)
    x = np.empty((n + 1, oracle.dim))
    y = np.empty((n, oracle.dim))
    fx = np.empty(n + 1)
    fy = np.empty(n)
    x[0] = x0
    fx[0] = _eval(oracle, x[0], 0)[0]
    yi = np.array(x0, dtype=float)
    for i in range(1, n + 1):
        y[i - 1] = yi
        fy[i - 1], g = _eval(oracle, yi, i)
        x[i] = yi - g / L
        fx[i] = _eval(oracle, x[i], i)[0]
        yi = x[i] + (t[i - 1] - 1) / t[i] * (x[i] - x[i - 1])
    return FgmRun(x, y, fx, fy)


@dataclass
class CocoercivityReport:
    max_violation: float
    num_pairs: int
    num_violations: int
    tol: float

    @property
    def ok(self) -> bool:
        return self.num_violations == 0


def cocoercivity_check(oracle: FunctionOracle, num_pairs: int = 1000, seed: int = 0,
                       tol: float = 1e-9) -> CocoercivityReport:
    """Sample 1/(2L)|g_x - g_y|^2 <= f(x) - f(y) - <g_y, x - y> at random pairs."""
    rng = np.random.default_rng(seed)
    L = oracle.lipschitz
    worst = -np.inf
    bad = 0
    for _ in range(num_pairs):
        pts = []
        for _ in range(2):
            d = rng.standard_normal(oracle.dim)
            d /= np.linalg.norm(d)
            pts.append(d * oracle.scale * 2.0 * rng.uniform() ** 2)
        x, y = pts
        fx, gx = oracle(x)
        fy, gy = oracle(y)
        viol = (gx - gy) @ (gx - gy) / (2 * L) - (fx - fy - gy @ (x - y))
        worst = max(worst, viol)
        bad += viol > tol
    return CocoercivityReport(float(worst), num_pairs, int(bad), tol)


def gradient_fd_error(oracle: FunctionOracle, num_points: int = 50, seed: int = 0,
                      step: float = 1e-6) -> float:
    """Max relative error of central differences against the reported gradient."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(num_points):
        x = rng.standard_normal(oracle.dim) * oracle.scale
        g = oracle.grad(x)
        fd = np.array([
            (oracle.value(x + step * e) - oracle.value(x - step * e)) / (2 * step)
            for e in np.eye(oracle.dim)
        ])
        worst = max(worst, np.linalg.norm(fd - g) / max(1.0, np.linalg.norm(g)))
    return float(worst)


@dataclass
class FeasibilityReport:
    max_violation: float
    by_family: dict = field(default_factory=dict)
    delta: np.ndarray | None = None
    G: np.ndarray | None = None

    @property
    def delta_n(self) -> float:
        return float(self.delta[-1])

    def ok(self, tol: float = 1e-9) -> bool:
        return self.max_violation <= tol


def primal_feasibility_check(traj: Trajectory) -> FeasibilityReport:
    """Normalize a real trajectory into (G, delta) and test every constraint of (Q)."""
    from .pep import build_constraint_matrices

    o = traj.oracle
    if o.minimizer is None or o.optimal_value is None:
        raise ValueError("primal feasibility check needs the oracle's minimizer and optimal value")
    if traj.schedule is None:
        raise ValueError("trajectory has no schedule")
    diff = o.minimizer - traj.points[0]
    R = float(np.linalg.norm(diff))
    if R == 0:
        raise ValueError("x_0 coincides with the minimizer")
    L = o.lipschitz
    nu = diff / R
    G = traj.grads / (L * R)
    delta = (traj.values - o.optimal_value) / (L * R**2)
    m = build_constraint_matrices(traj.schedule)
    gram = G @ G.T

    def q(M):
        return float(np.sum(M * gram))

    fam = {"A": -np.inf, "B": -np.inf, "C": -np.inf, "D": -np.inf}
    for (i, j), M in m.A.items():
        fam["A"] = max(fam["A"], q(M) - (delta[i] - delta[j]))
    for (i, j), M in m.B.items():
        fam["B"] = max(fam["B"], q(M) - (delta[i] - delta[j]))
    for i, M in enumerate(m.C):
        fam["C"] = max(fam["C"], q(M) - delta[i])
    for i, M in enumerate(m.D):
        fam["D"] = max(fam["D"], q(M) + float(G[i] @ nu) + delta[i])
    fam = {k: (v if np.isfinite(v) else 0.0) for k, v in fam.items()}
    return FeasibilityReport(max(fam.values()), fam, delta, G)
