from __future__ import annotations

import math

from dataclasses import dataclass, field
from enum import Enum

from spotvol.models.configs import EstimatorConfig, floor_int
from spotvol.models.exceptions import InvalidParameter

@dataclass(frozen=True)
class PathError:
    """Integrated squared and absolute error of one estimated path, per-day units."""
    ise: float
    iae: float

    def __post_init__(self):
        if not (self.ise >= 0 and self.iae >= 0):
            raise InvalidParameter("path error", (self.ise, self.iae), "must be nonnegative")

class Regime(Enum):
    """Asymptotic regimes of the spot estimator.

    The no-noise regimes take N = floor(c n); the noise regimes take
    N = floor(c sqrt(n)). Optimal regimes take M proportional to the square
    root of n (resp. N), suboptimal ones to its power 1/tau."""
    NO_NOISE_SUBOPT = "no-noise-subopt"
    NO_NOISE_OPT = "no-noise-opt"
    NOISE_SUBOPT = "noise-subopt"
    NOISE_OPT = "noise-opt"

    @property
    def noisy(self) -> bool:
        return self in (Regime.NOISE_SUBOPT, Regime.NOISE_OPT)

    @property
    def optimal(self) -> bool:
        return self in (Regime.NO_NOISE_OPT, Regime.NOISE_OPT)

    @classmethod
    def parse(cls, value: str) -> Regime:
        try:
            return cls(value.lower().replace("_", "-"))
        except ValueError:
            raise InvalidParameter("regime", value, f"expected one of {', '.join(r.value for r in cls)}")

@dataclass(frozen=True)
class CltSpec:
    """Regime, cut-off constants and evaluation time of a CLT check.

    t_eval is a fraction of the session; tau is the exponent of the suboptimal
    regimes and must lie in (1, 2)."""
    regime: Regime
    c: float
    a: float
    t_eval: float = 0.5
    tau: float = 1.5

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidParameter("c", self.c, "must be positive")
        if not self.a > 0:
            raise InvalidParameter("a", self.a, "must be positive")
        if not 0 < self.t_eval < 1:
            raise InvalidParameter("t_eval", self.t_eval, "must be a fraction strictly inside (0, 1)")
        if not 1 < self.tau < 2:
            raise InvalidParameter("tau", self.tau, "must lie in (1, 2)")

    def cutoffs(self, n: int) -> EstimatorConfig:
        """Returns the (N, M) the regime implies for n increments."""
        if self.regime.noisy:
            N = floor_int(self.c * math.sqrt(n))
            base = N
        else:
            N = floor_int(self.c * n)
            base = n
        exponent = 0.5 if self.regime.optimal else 1 / self.tau
        return EstimatorConfig(N=N, M=floor_int(self.a * base ** exponent))

    def rate(self, n: int, M: int) -> float:
        """Returns the normalizing rate n^(1/2) M^(-1/2), or n^(1/4) M^(-1/2) with noise."""
        power = 0.25 if self.regime.noisy else 0.5
        return n ** power / math.sqrt(M)

@dataclass(frozen=True)
class CltResult:
    spec: CltSpec
    n: int
    N: int
    M: int
    n_paths: int
    ks_stat: float
    ks_pvalue: float
    jb_stat: float
    jb_pvalue: float
    coverage_95: float
    mean_z: float
    var_z: float
    feasible: bool = False
    avar_scale: float = 1.0
    z: tuple[float, ...] = field(default=(), repr=False)

@dataclass(frozen=True)
class LemmaRow:
    """One limit identity evaluated at increasing orders."""
    name: str
    target: float
    orders: tuple[int, ...]
    observed: tuple[float, ...]
    errors: tuple[float, ...]
    tolerances: tuple[float, ...]
    slope: float
    passed: bool
    absolute: bool = False

    @property
    def final_error(self) -> float:
        return self.errors[-1]

@dataclass(frozen=True)
class LemmaReport:
    rows: tuple[LemmaRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def targets(self) -> dict[str, float]:
        return {row.name: row.target for row in self.rows}

    def failures(self) -> list[LemmaRow]:
        return [row for row in self.rows if not row.passed]
