from __future__ import annotations

import math
import numpy as np

from dataclasses import dataclass, fields
from typing import Any, Mapping

from spotvol.models.exceptions import ConfigurationError, InvalidParameter, UnsupportedModel

@dataclass(frozen=True)
class Sv1fParams:
    """One factor stochastic volatility model, time in days.

    dp = mu dt + sigma dW, sigma = exp(beta0 + beta1 tau), dtau = alpha tau dt + dZ,
    with corr(W, Z) = rho. beta0 defaults to beta1/(2 alpha)."""
    mu: float = 0.03
    beta1: float = 0.125
    alpha: float = -0.025
    beta0: float | None = None
    rho: float = -0.3
    tau0: float | None = None

    def __post_init__(self):
        if not self.alpha < 0:
            raise InvalidParameter("alpha", self.alpha, "must be negative for a stationary factor")
        if not -1 <= self.rho <= 1:
            raise InvalidParameter("rho", self.rho, "must lie in [-1, 1]")
        if self.beta0 is None:
            object.__setattr__(self, "beta0", self.beta1 / (2 * self.alpha))

    @property
    def intercept(self) -> float:
        assert self.beta0 is not None
        return self.beta0

    @property
    def stationary_variance(self) -> float:
        """Returns the variance -1/(2 alpha) of the stationary factor."""
        return -1 / (2 * self.alpha)

@dataclass(frozen=True)
class HestonParams:
    """Heston model, time in days.

    dp = (mu - v/2) dt + sqrt(v) dW, dv = theta (alpha - v) dt + gamma sqrt(v) dZ,
    with corr(W, Z) = rho. The initial variance is drawn from the stationary
    Gamma law unless v0 is given."""
    mu: float = 0.001
    theta: float = 0.3
    alpha: float = 0.002
    gamma: float = 0.03
    rho: float = -0.5
    v0: float | None = None

    def __post_init__(self):
        if not self.theta > 0:
            raise InvalidParameter("theta", self.theta, "must be positive")
        if not self.alpha > 0:
            raise InvalidParameter("alpha", self.alpha, "must be positive")
        if not self.gamma >= 0:
            raise InvalidParameter("gamma", self.gamma, "must be nonnegative")
        if not -1 <= self.rho <= 1:
            raise InvalidParameter("rho", self.rho, "must lie in [-1, 1]")
        if self.v0 is not None and not self.v0 >= 0:
            raise InvalidParameter("v0", self.v0, "must be nonnegative")

    @property
    def gamma_shape(self) -> float:
        """Returns the shape 2 theta alpha / gamma^2 of the stationary law."""
        return 2 * self.theta * self.alpha / self.gamma ** 2

    @property
    def gamma_scale(self) -> float:
        """Returns the scale gamma^2 / (2 theta) of the stationary law."""
        return self.gamma ** 2 / (2 * self.theta)

    @property
    def feller(self) -> bool:
        return 2 * self.theta * self.alpha >= self.gamma ** 2

@dataclass(frozen=True)
class ConstantVolParams:
    """Constant spot variance sigma2 per day with drift mu."""
    sigma2: float = 0.002
    mu: float = 0.0

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise InvalidParameter("sigma2", self.sigma2, "must be positive")

@dataclass(frozen=True)
class NoiseSpec:
    """Additive i.i.d. Gaussian noise with variance xi = (zeta * std(r))^2.

    return_std fixes std(r) for every path; when unset each path uses the
    standard deviation of its own clean returns."""
    zeta: float = 0.0
    return_std: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.zeta) and self.zeta >= 0):
            raise InvalidParameter("zeta", self.zeta, "must be finite and nonnegative")
        if self.return_std is not None and not self.return_std > 0:
            raise InvalidParameter("return_std", self.return_std, "must be positive")

    def xi_for(self, returns: np.ndarray) -> float:
        """Returns the noise variance for a path with the given clean returns."""
        if self.zeta == 0:
            return 0.0
        std = self.return_std if self.return_std is not None else float(np.std(returns))
        return (self.zeta * std) ** 2

ModelParams = Sv1fParams | HestonParams | ConstantVolParams

MODEL_PARAMS: dict[str, type[Sv1fParams] | type[HestonParams] | type[ConstantVolParams]] = {
    "sv1f": Sv1fParams,
    "heston": HestonParams,
    "constant": ConstantVolParams,
}

def model_params(model: str, overrides: Mapping[str, Any] | None = None) -> ModelParams:
    """Builds the parameters of a model from string or numeric overrides."""
    try:
        cls = MODEL_PARAMS[model]
    except KeyError:
        raise UnsupportedModel(model, list(MODEL_PARAMS))

    known = {f.name for f in fields(cls)}
    values: dict[str, float] = {}
    for key, value in (overrides or {}).items():
        name = key.replace("-", "_")
        if name not in known:
            raise ConfigurationError(f"{model} has no parameter {key!r}, expected one of {', '.join(sorted(known))}")
        try:
            values[name] = float(value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"parameter {key!r} must be a number, got {value!r}")
    return cls(**values)
