"""Step-size coefficient triangles for fixed-step first-order methods.

A schedule of length N stores h[i][k] for 1 <= i <= N, 0 <= k < i, and the
method it encodes is

    x_i = x_{i-1} - (1/L) * sum_{k<i} h[i][k] * f'(x_k).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ScheduleFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StepSchedule:
    n: int
    table: np.ndarray  # (n, n) lower triangular; table[i-1, k] = h_k^{(i)}
    label: str = ""

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"step count must be a positive integer, got {self.n!r}")
        t = np.array(self.table, dtype=float)
        if t.shape != (self.n, self.n):
            raise ValueError(f"table shape {t.shape} does not match n={self.n}")
        if not np.all(np.isfinite(t)):
            raise ValueError("schedule coefficients must be finite")
        if np.any(np.triu(t, 1) != 0):
            raise ValueError("entries above the triangle must be zero")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def from_rows(cls, rows, label: str = "") -> "StepSchedule":
        n = len(rows)
        table = np.zeros((n, n))
        for i, row in enumerate(rows, start=1):
            if len(row) != i:
                raise ValueError(f"row {i} has {len(row)} entries, expected {i}")
            table[i - 1, :i] = row
        return cls(n, table, label)

    @property
    def rows(self) -> list[list[float]]:
        return [self.table[i, : i + 1].tolist() for i in range(self.n)]

    def coeff(self, i: int, k: int) -> float:
        """h_k^{(i)}; zero outside 0 <= k < i <= n."""
        if 0 <= k < i <= self.n:
            return float(self.table[i - 1, k])
        return 0.0

    def cumulative(self) -> np.ndarray:
        """c[i, k] = sum_{t=k+1}^{i} h_k^{(t)}, the weight of g_k in x_0 - x_i."""
        c = np.zeros((self.n + 1, self.n + 1))
        c[1:, :] = np.cumsum(np.pad(self.table, ((0, 0), (0, 1))), axis=0)
        return np.tril(c, -1)

    def truncated(self, m: int) -> "StepSchedule":
        return StepSchedule(m, self.table[:m, :m], self.label)

    def __eq__(self, other):
        return (
            isinstance(other, StepSchedule)
            and self.n == other.n
            and np.array_equal(self.table, other.table)
        )

    def allclose(self, other: "StepSchedule", atol=1e-12) -> bool:
        return self.n == other.n and np.allclose(self.table, other.table, rtol=0, atol=atol)

    def __repr__(self):
        return f"StepSchedule(n={self.n}, label={self.label!r})"


def gm_schedule(n: int, h: float) -> StepSchedule:
    if n < 1:
        raise ValueError("step count must be positive")
    if not math.isfinite(h):
        raise ValueError("step size must be finite")
    return StepSchedule(n, h * np.eye(n), f"gm(h={h:g})")


def hbm_schedule(n: int, alpha: float, beta: float) -> StepSchedule:
    """Heavy ball: h_k^{(i+1)} = alpha * beta^(i-k)."""
    if not (0 <= beta < 1 and 0 < alpha < 2 * (1 + beta)):
        warnings.warn(
            f"heavy ball parameters alpha={alpha}, beta={beta} are outside "
            "0 <= beta < 1, 0 < alpha < 2(1+beta)",
            RuntimeWarning,
            stacklevel=2,
        )
    if n < 1:
        raise ValueError("step count must be positive")
    i = np.arange(n)[:, None]
    k = np.arange(n)[None, :]
    with np.errstate(invalid="ignore"):
        table = np.where(k <= i, alpha * np.power(float(beta), np.maximum(i - k, 0)), 0.0)
    return StepSchedule(n, table, f"hbm(alpha={alpha:g},beta={beta:g})")


def fgm_t_sequence(n: int) -> np.ndarray:
    """t_1..t_n with t_1 = 1 and t_{i+1} = (1 + sqrt(1 + 4 t_i^2)) / 2."""
    t = np.empty(n)
    t[0] = 1.0
    for i in range(1, n):
        t[i] = (1 + math.sqrt(1 + 4 * t[i - 1] ** 2)) / 2
    return t


def _fgm_prime_coeffs(n: int) -> dict[tuple[int, int], float]:
    """h_k^{(i+1)} of the single-sequence form, i = 1..n-1, k = 1..i (1-based k)."""
    t = fgm_t_sequence(n)  # t[i-1] = t_i
    h: dict[tuple[int, int], float] = {}
    for i in range(1, n):
        ratio = (t[i - 1] - 1) / t[i]
        for k in range(1, i + 1):
            if k == i:
                h[i + 1, k] = 1 + ratio
            elif k == i - 1:
                h[i + 1, k] = ratio * (h[i, i - 1] - 1)
            else:
                h[i + 1, k] = ratio * h[i, k]
    return h


def fgm_schedule(n: int, variant: str = "main") -> StepSchedule:
    """Fast gradient method as an explicit triangle.

    ``auxiliary`` has n-1 steps and ends at y_n; ``main`` appends the final
    plain gradient step, ending at x_n.  Gradient index k of the
    single-sequence form maps to schedule index k-1 because y_1 = x_0.
    """
    if n < 1:
        raise ValueError("step count must be positive")
    if variant in ("aux", "auxiliary"):
        if n == 1:
            raise ValueError("auxiliary FGM sequence needs n >= 2 (y_1 is the starting point)")
        m = n - 1
    elif variant == "main":
        m = n
    else:
        raise ValueError(f"unknown FGM variant {variant!r}")
    h = _fgm_prime_coeffs(n)
    table = np.zeros((m, m))
    for (ip1, k), v in h.items():
        table[ip1 - 2, k - 1] = v
    if variant == "main":
        table[n - 1, n - 1] = 1.0
        label = f"fgm-main(n={n})"
    else:
        label = f"fgm-aux(n={n})"
    return StepSchedule(m, table, label)


def save_schedule(s: StepSchedule, path) -> None:
    doc = {"n": int(s.n), "rows": s.rows}
    if s.label:
        doc["label"] = s.label
    # json writes floats with repr, i.e. 17 significant digits
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def parse_schedule(doc) -> StepSchedule:
    if not isinstance(doc, dict) or "n" not in doc or "rows" not in doc:
        raise ScheduleFormatError("schedule document needs keys 'n' and 'rows'")
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ScheduleFormatError(f"'n' must be a positive integer, got {n!r}")
    rows = doc["rows"]
    if not isinstance(rows, list) or len(rows) != n:
        got = len(rows) if isinstance(rows, list) else type(rows).__name__
        raise ScheduleFormatError(f"expected {n} rows, got {got}")
    for i, row in enumerate(rows, start=1):
        if not isinstance(row, list) or len(row) != i:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise ScheduleFormatError(f"row {i}: expected {i} numbers, got {got}")
        for k, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ScheduleFormatError(f"row {i}, column {k}: invalid number {v!r}")
    return StepSchedule.from_rows(rows, doc.get("label", ""))


def load_schedule(path) -> StepSchedule:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScheduleFormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_schedule(doc)
