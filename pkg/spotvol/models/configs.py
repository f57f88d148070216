from __future__ import annotations

import math
import numpy as np

from dataclasses import dataclass, field

from spotvol.constants import (
    DEFAULT_C_LAMBDA, DEFAULT_MAX_ITERS, DEFAULT_THRESHOLD
)
from spotvol.models.exceptions import InvalidParameter

# Floors of products like c * n**p land a hair below an integer in floating point
_FLOOR_SLACK = 1e-9

def floor_int(value: float) -> int:
    """Floors a derived order, tolerating rounding just below an integer."""
    return int(math.floor(value + _FLOOR_SLACK))

@dataclass(frozen=True)
class EstimatorConfig:
    """Cut-off frequencies of the Fourier estimator."""
    N: int
    M: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise InvalidParameter("N", self.N, "must be a positive integer")
        if int(self.M) != self.M or self.M < 1:
            raise InvalidParameter("M", self.M, "must be a positive integer")

    @classmethod
    def from_constants(cls, c: float, a: float, n: int) -> EstimatorConfig:
        """Builds N = floor(c sqrt(n)) and M = floor(a sqrt(N))."""
        if c <= 0:
            raise InvalidParameter("c", c, "must be positive")
        if a <= 0:
            raise InvalidParameter("a", a, "must be positive")
        N = floor_int(c * math.sqrt(n))
        return cls(N=N, M=floor_int(a * math.sqrt(N)))

    def validate_for(self, n: int) -> None:
        """Raises InvalidParameter unless M < N < n."""
        if not self.M < self.N:
            raise InvalidParameter("M", self.M, f"must be below N={self.N}")
        if not self.N < n:
            raise InvalidParameter("N", self.N, f"must be below the number of increments {n}")

@dataclass(frozen=True)
class TwoScaleConfig:
    """Constants of the two-scale estimator: lag k = floor(c_k n^(2/3)), window h = c_h n^(-1/6) days."""
    c_k: float
    c_h: float

    def __post_init__(self):
        if not self.c_k > 0:
            raise InvalidParameter("c_k", self.c_k, "must be positive")
        if not self.c_h > 0:
            raise InvalidParameter("c_h", self.c_h, "must be positive")

    def lag(self, n: int) -> int:
        return floor_int(self.c_k * n ** (2 / 3))

    def window(self, n: int) -> float:
        """Returns the window length in days."""
        return self.c_h * n ** (-1 / 6)

@dataclass(frozen=True)
class PreAvgConfig:
    """Constants of the pre-averaging estimator.

    The pre-averaging window is k = floor(1/(c_k sqrt(delta))) observations and the
    kernel bandwidth is m delta = c_m delta^(1/4) days, where delta is the mesh in days.
    The kernel is 0.5 exp(-|x|) and the weight is g(x) = min(x, 1 - x)."""
    c_k: float
    c_m: float

    def __post_init__(self):
        if not self.c_k > 0:
            raise InvalidParameter("c_k", self.c_k, "must be positive")
        if not self.c_m > 0:
            raise InvalidParameter("c_m", self.c_m, "must be positive")

    def window(self, delta: float) -> int:
        return floor_int(1.0 / (self.c_k * math.sqrt(delta)))

    def bandwidth(self, delta: float) -> float:
        """Returns m * delta in days."""
        return self.c_m * delta ** 0.25

@dataclass(frozen=True)
class AmiseInputs:
    """Plug-in values feeding the c-AMISE objective, per-day units."""
    iv: float
    iq: float
    ivv: float
    xi: float
    n: int
    T: float = 1.0
    clamped: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("iv", "iq", "ivv", "xi"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvalidParameter(name, value, "must be finite and nonnegative")
        if self.n < 2:
            raise InvalidParameter("n", self.n, "must be at least 2")
        if not self.T > 0:
            raise InvalidParameter("T", self.T, "must be positive")

@dataclass(frozen=True)
class SelectorBox:
    """Constraint region of the (N, M) descent."""
    N_lo: float
    N_hi: float
    M_lo: float
    M_hi: float

    def __post_init__(self):
        if not 0 < self.N_lo < self.N_hi:
            raise InvalidParameter("N box", (self.N_lo, self.N_hi), "needs 0 < N_lo < N_hi")
        if not 0 < self.M_lo < self.M_hi:
            raise InvalidParameter("M box", (self.M_lo, self.M_hi), "needs 0 < M_lo < M_hi")

    @classmethod
    def default(cls, n: int) -> SelectorBox:
        """Returns [sqrt(n)/2, 10 sqrt(n)] x [n^(1/4)/10, 2 n^(1/4)], floored."""
        root = math.sqrt(n)
        quarter = n ** 0.25
        return cls(
            N_lo=max(floor_int(root / 2), 1), N_hi=floor_int(10 * root),
            M_lo=max(floor_int(quarter / 10), 1), M_hi=floor_int(2 * quarter)
        )

    def clip(self, N: float, M: float) -> tuple[float, float]:
        return (min(max(N, self.N_lo), self.N_hi), min(max(M, self.M_lo), self.M_hi))

    def contains(self, N: float, M: float) -> bool:
        return self.N_lo <= N <= self.N_hi and self.M_lo <= M <= self.M_hi

@dataclass(frozen=True)
class SelectorOptions:
    """Options of the projected gradient descent.

    learning_rate overrides the rule c_lambda / xi."""
    box: SelectorBox | None = None
    c_lambda: float = DEFAULT_C_LAMBDA
    learning_rate: float | None = None
    threshold: float = DEFAULT_THRESHOLD
    max_iters: int = DEFAULT_MAX_ITERS

    def __post_init__(self):
        if not self.c_lambda > 0:
            raise InvalidParameter("c_lambda", self.c_lambda, "must be positive")
        if self.learning_rate is not None and not self.learning_rate > 0:
            raise InvalidParameter("learning_rate", self.learning_rate, "must be positive")
        if not self.threshold > 0:
            raise InvalidParameter("threshold", self.threshold, "must be positive")
        if self.max_iters < 1:
            raise InvalidParameter("max_iters", self.max_iters, "must be at least 1")

@dataclass(frozen=True)
class SelectorResult:
    N_star: int
    M_star: int
    iterations: int
    converged: bool
    objective_trace: np.ndarray = field(repr=False)
    N_path: np.ndarray = field(repr=False)
    M_path: np.ndarray = field(repr=False)
    learning_rate: float = 0.0
    backtracks: int = 0
    stalled: bool = False

    @property
    def config(self) -> EstimatorConfig:
        """Returns the selection as estimator cut-offs."""
        return EstimatorConfig(N=self.N_star, M=self.M_star)
