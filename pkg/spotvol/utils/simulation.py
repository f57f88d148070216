"""Euler schemes for the stochastic volatility models and the additive noise.

Every path owns one seed. The seed is split into two independent streams, the
first drives the prices and the volatility, the second the noise, so the clean
path is the same whatever noise is added to it.
"""
from __future__ import annotations

import logging
import math
import numpy as np

from scipy import signal

from spotvol.constants import INITIAL_LOG_PRICE, SESSION_SECONDS
from spotvol.models.dynamics import (
    ConstantVolParams, HestonParams, ModelParams, NoiseSpec, Sv1fParams, model_params
)
from spotvol.models.exceptions import InvalidParameter, UnsupportedModel
from spotvol.models.paths import PricePath, SimulatedPath, SpotVolPath

logger = logging.getLogger("SpotVol")

def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    price, noise = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(price), np.random.default_rng(noise)

def _check_sizes(n: int, T_seconds: float, day_seconds: float | None) -> tuple[np.ndarray, float, float]:
    """Returns the timestamps, the step in days and the day length in seconds."""
    if int(n) != n or n < 2:
        raise InvalidParameter("n", n, "must be an integer of at least 2")
    if not T_seconds > 0:
        raise InvalidParameter("T", T_seconds, "must be positive")
    day = T_seconds if day_seconds is None else day_seconds
    if not day > 0:
        raise InvalidParameter("day_seconds", day, "must be positive")
    timestamps = np.linspace(0.0, T_seconds, int(n) + 1)
    return timestamps, T_seconds / day / n, day

def _assemble(
    model: str,
    timestamps: np.ndarray,
    logprices: np.ndarray,
    variance: np.ndarray,
    day: float,
    seed: int,
    truncated_share: float = 0.0
) -> SimulatedPath:
    horizon = float(timestamps[-1])
    prices = PricePath(timestamps, logprices, horizon, day_length=day)
    return SimulatedPath(
        model=model,
        prices=prices,
        noisy_prices=prices,
        true_var=SpotVolPath(timestamps, variance, horizon, day_length=day),
        seed=seed,
        truncated_share=truncated_share,
    )

def _brownian_pair(rng: np.random.Generator, n: int, rho: float) -> tuple[np.ndarray, np.ndarray]:
    """Returns standard normal shocks (W, Z) with correlation rho."""
    z = rng.standard_normal(n)
    independent = rng.standard_normal(n)
    return rho * z + math.sqrt(1 - rho ** 2) * independent, z

def simulate_sv1f(params: Sv1fParams, n: int, T_seconds: float = SESSION_SECONDS, seed: int = 0, *, day_seconds: float | None = None) -> SimulatedPath:
    """Simulates the one factor model at n equal steps over T_seconds."""
    timestamps, delta, day = _check_sizes(n, T_seconds, day_seconds)
    rng, _ = _streams(seed)

    if params.tau0 is None:
        tau0 = rng.normal(0.0, math.sqrt(params.stationary_variance))
    else:
        tau0 = params.tau0
    w, z = _brownian_pair(rng, n, params.rho)

    # tau_{j+1} = (1 + alpha delta) tau_j + sqrt(delta) z_j
    decay = 1 + params.alpha * delta
    tail = signal.lfilter([1.0], [1.0, -decay], math.sqrt(delta) * z, zi=[decay * tau0])[0]
    tau = np.concatenate(([tau0], tail))
    sigma = np.exp(params.intercept + params.beta1 * tau)

    returns = params.mu * delta + sigma[:-1] * math.sqrt(delta) * w
    logprices = INITIAL_LOG_PRICE + np.concatenate(([0.0], np.cumsum(returns)))
    return _assemble("sv1f", timestamps, logprices, sigma ** 2, day, seed)

def simulate_heston(params: HestonParams, n: int, T_seconds: float = SESSION_SECONDS, seed: int = 0, *, day_seconds: float | None = None) -> SimulatedPath:
    """Simulates the Heston model with full truncation of the variance."""
    timestamps, delta, day = _check_sizes(n, T_seconds, day_seconds)
    rng, _ = _streams(seed)

    if params.v0 is None:
        v = float(rng.gamma(params.gamma_shape, params.gamma_scale)) if params.gamma > 0 else params.alpha
    else:
        v = params.v0
    w, z = _brownian_pair(rng, n, params.rho)
    root_delta = math.sqrt(delta)

    variance = np.empty(n + 1)
    logprices = np.empty(n + 1)
    p = INITIAL_LOG_PRICE
    truncated = 0
    for j in range(n):
        positive = v if v > 0 else 0.0
        if v < 0:
            truncated += 1
        variance[j] = positive
        logprices[j] = p
        diffusion = math.sqrt(positive) * root_delta
        p += (params.mu - positive / 2) * delta + diffusion * w[j]
        v += params.theta * (params.alpha - positive) * delta + params.gamma * diffusion * z[j]
    variance[n] = v if v > 0 else 0.0
    logprices[n] = p

    share = truncated / n
    if truncated:
        logger.debug(f"Heston path {seed} truncated the variance on {share:.2e} of its steps")
    return _assemble("heston", timestamps, logprices, variance, day, seed, truncated_share=share)

def simulate_constant(params: ConstantVolParams, n: int, T_seconds: float = SESSION_SECONDS, seed: int = 0, *, day_seconds: float | None = None) -> SimulatedPath:
    """Simulates a Brownian log-price with constant variance."""
    timestamps, delta, day = _check_sizes(n, T_seconds, day_seconds)
    rng, _ = _streams(seed)
    returns = params.mu * delta + math.sqrt(params.sigma2 * delta) * rng.standard_normal(n)
    logprices = INITIAL_LOG_PRICE + np.concatenate(([0.0], np.cumsum(returns)))
    return _assemble("constant", timestamps, logprices, np.full(n + 1, params.sigma2), day, seed)

def add_noise(path: SimulatedPath, noise: NoiseSpec | float, seed: int | None = None) -> SimulatedPath:
    """Returns the path with i.i.d. Gaussian noise of variance (zeta std(r))^2 on its prices.

    The noise comes from the second stream of the seed, the path's own seed by default."""
    spec = noise if isinstance(noise, NoiseSpec) else NoiseSpec(zeta=noise)
    if spec.zeta == 0:
        return SimulatedPath(
            model=path.model, prices=path.prices, noisy_prices=path.prices, true_var=path.true_var,
            seed=path.seed, truncated_share=path.truncated_share
        )

    _, rng = _streams(path.seed if seed is None else seed)
    xi = spec.xi_for(path.prices.increments)
    eta = rng.normal(0.0, math.sqrt(xi), path.prices.logprices.size)
    return SimulatedPath(
        model=path.model,
        prices=path.prices,
        noisy_prices=path.prices.with_logprices(path.prices.logprices + eta),
        true_var=path.true_var,
        seed=path.seed,
        zeta=spec.zeta,
        xi=xi,
        truncated_share=path.truncated_share,
    )

def simulate(
    model: str,
    n: int,
    T_seconds: float = SESSION_SECONDS,
    seed: int = 0,
    *,
    params: ModelParams | None = None,
    noise: NoiseSpec | float = 0.0,
    day_seconds: float | None = None
) -> SimulatedPath:
    """Simulates one path of the named model and adds its noise."""
    if params is None:
        params = model_params(model)
    match params:
        case Sv1fParams() if model == "sv1f":
            path = simulate_sv1f(params, n, T_seconds, seed, day_seconds=day_seconds)
        case HestonParams() if model == "heston":
            path = simulate_heston(params, n, T_seconds, seed, day_seconds=day_seconds)
        case ConstantVolParams() if model == "constant":
            path = simulate_constant(params, n, T_seconds, seed, day_seconds=day_seconds)
        case _:
            raise UnsupportedModel(model, ["sv1f", "heston", "constant"])
    return add_noise(path, noise)
