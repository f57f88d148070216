"""Two-scale and pre-averaging kernel estimators of the spot variance.

Both estimators take times in days internally: windows, lags and bandwidths
follow the sample size through the constants of their configs, and the
estimates come out as variance per day like the Fourier estimator.
"""
from __future__ import annotations

import logging
import math
import numpy as np

from functools import cache
from scipy import integrate
from typing import TYPE_CHECKING, NamedTuple

from spotvol.models.configs import AmiseInputs, PreAvgConfig, TwoScaleConfig
from spotvol.models.exceptions import InvalidGrid, InvalidParameter, WindowOutOfRange
from spotvol.models.paths import PricePath, SpotVolPath
from spotvol.utils.fourier import default_grid, validate_grid

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger("SpotVol")

# Grid rows weighted at once by the pre-averaging kernel
_KERNEL_CHUNK = 256

def tent(x: ArrayLike) -> NDArray[np.float64]:
    """Returns the weight function g(x) = min(x, 1 - x) on [0, 1], 0 outside."""
    points = np.asarray(x, dtype=float)
    return np.where((points >= 0) & (points <= 1), np.minimum(points, 1 - points), 0.0)

def exponential_kernel(x: ArrayLike) -> NDArray[np.float64]:
    """Returns K(x) = exp(-|x|)/2."""
    return 0.5 * np.exp(-np.abs(np.asarray(x, dtype=float)))

# Two-scale

def _two_scale_terms(path: PricePath, k: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Returns the k-lag squared returns A_i (i <= n - k) and the squared increments B_i (i < n)."""
    p = path.logprices
    return (p[k:] - p[:-k]) ** 2, path.increments ** 2

def _two_scale_lag(path: PricePath, cfg: TwoScaleConfig) -> tuple[int, float]:
    k = cfg.lag(path.n)
    if k < 2:
        raise InvalidParameter("c_k", cfg.c_k, f"gives lag k={k}, the two-scale estimator needs k >= 2")
    if k >= path.n:
        raise InvalidParameter("c_k", cfg.c_k, f"gives lag k={k}, not below n={path.n}")
    h = cfg.window(path.n)
    if not 0 < h <= path.horizon_days * (1 + 1e-12):
        raise InvalidParameter("c_h", cfg.c_h, f"gives window {h:g} days, longer than the sample")
    return k, min(h, path.horizon_days)

def _two_scale_value(
    path: PricePath, k: int, h: float, lo: int, hi: int,
    squares: tuple[NDArray[np.float64], NDArray[np.float64]]
) -> float:
    """Evaluates the estimator over the observations lo..hi-1 of a window of h days."""
    lagged, single = squares
    n_rate = path.n / path.horizon_days
    n_bar = (n_rate * h - k + 1) / (k * h)
    first = lagged[lo:min(hi, lagged.size)].sum() / (k * h)
    second = single[lo:min(hi, single.size)].sum() / h
    return float(first - n_bar / n_rate * second)

def two_scale(path: PricePath, t: float, cfg: TwoScaleConfig) -> float:
    """Returns the two-scale spot variance over the window [t, t + h], per day.

    t is in the path's time unit; every observation time inside the window
    starts a k-lag return when t_{i+k} is still in the sample."""
    k, h = _two_scale_lag(path, cfg)
    span = h * path.day_length
    if t < 0 or t + span > path.horizon * (1 + 1e-12):
        raise WindowOutOfRange(t, t + span, path.horizon)
    lo = int(np.searchsorted(path.timestamps, t, side="left"))
    hi = int(np.searchsorted(path.timestamps, min(t + span, path.horizon), side="right"))
    if hi - lo < 2:
        raise InvalidGrid(f"two-scale window starting at {t:g} holds fewer than two observations")
    return _two_scale_value(path, k, h, lo, hi, _two_scale_terms(path, k))

def two_scale_path(path: PricePath, cfg: TwoScaleConfig, grid: ArrayLike | None = None) -> SpotVolPath:
    """Returns the two-scale estimate at each grid point.

    Grid points closer than h to the close use the last full window [T - h, T]."""
    points = validate_grid(default_grid(path) if grid is None else grid, path.horizon)
    k, h = _two_scale_lag(path, cfg)
    span = h * path.day_length
    squares = _two_scale_terms(path, k)

    values = np.empty(points.size)
    for idx, t in enumerate(points):
        start = min(t, path.horizon - span)
        end = path.horizon if start + span >= path.horizon else start + span
        lo = int(np.searchsorted(path.timestamps, start, side="left"))
        hi = int(np.searchsorted(path.timestamps, end, side="right"))
        if hi - lo < 2:
            raise InvalidGrid(f"two-scale window starting at {start:g} holds fewer than two observations")
        values[idx] = _two_scale_value(path, k, h, lo, hi, squares)
    return SpotVolPath(points, values, path.horizon, day_length=path.day_length)

# Pre-averaging

def preaverage_weights(k: int) -> NDArray[np.float64]:
    """Returns d_j = g(j/k) - g((j-1)/k) for j = 1..k."""
    grid = tent(np.arange(k + 1) / k)
    return np.diff(grid)

def phi_k(k: int) -> float:
    """Returns sum_{j=1}^{k} g(j/k)^2."""
    return float(np.sum(tent(np.arange(1, k + 1) / k) ** 2))

def preaveraged_returns(path: PricePath, k: int) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """Returns (P_bar, P_hat, times) for i = 1..n-k+1.

    P_bar_i = -sum_j d_j p_{i+j-2} and P_hat_i = sum_j d_j^2 delta_{i+j-2}^2; the
    times are t_i."""
    n = path.n
    if k < 2:
        raise InvalidParameter("k", k, "pre-averaging window must be at least 2")
    if k > n:
        raise InvalidParameter("k", k, f"pre-averaging window must not exceed n={n}")
    d = preaverage_weights(k)
    count = n - k + 1
    p_bar = -np.correlate(path.logprices, d, mode="valid")[:count]
    p_hat = np.correlate(path.increments ** 2, d ** 2, mode="valid")[:count]
    return p_bar, p_hat, path.timestamps[1:count + 1]

def _preaveraging_setup(path: PricePath, cfg: PreAvgConfig) -> tuple[int, float]:
    delta = path.horizon_days / path.n
    k = cfg.window(delta)
    bandwidth = cfg.bandwidth(delta)
    if not (math.isfinite(bandwidth) and bandwidth > 0):
        raise InvalidParameter("c_m", cfg.c_m, "gives a degenerate kernel bandwidth")
    return k, bandwidth

def _preaveraging_values(
    path: PricePath, points: NDArray[np.float64], k: int, bandwidth: float
) -> NDArray[np.float64]:
    p_bar, p_hat, times = preaveraged_returns(path, k)
    terms = p_bar ** 2 - 0.5 * p_hat
    days = times / path.day_length
    out = np.empty(points.size)
    for start in range(0, points.size, _KERNEL_CHUNK):
        t = points[start:start + _KERNEL_CHUNK] / path.day_length
        weights = exponential_kernel(np.subtract.outer(days, t).T / bandwidth) / bandwidth
        out[start:start + _KERNEL_CHUNK] = weights @ terms
    return out / phi_k(k)

def preaveraging(path: PricePath, t: float, cfg: PreAvgConfig) -> float:
    """Returns the pre-averaging kernel spot variance at t, per day."""
    if not 0 < t < path.horizon:
        raise InvalidGrid(f"pre-averaging point {t:g} is not strictly inside (0, {path.horizon:g})")
    k, bandwidth = _preaveraging_setup(path, cfg)
    return float(_preaveraging_values(path, np.array([t], dtype=float), k, bandwidth)[0])

def preaveraging_path(path: PricePath, cfg: PreAvgConfig, grid: ArrayLike | None = None) -> SpotVolPath:
    """Returns the pre-averaging estimate at each grid point."""
    points = validate_grid(default_grid(path) if grid is None else grid, path.horizon)
    k, bandwidth = _preaveraging_setup(path, cfg)
    values = _preaveraging_values(path, points, k, bandwidth)
    return SpotVolPath(points, values, path.horizon, day_length=path.day_length)

# Tuning

class TentConstants(NamedTuple):
    psi1: float
    psi2: float
    phi11: float
    phi12: float
    phi22: float

def _tent_slope(u: float) -> float:
    if 0 <= u < 0.5:
        return 1.0
    if 0.5 <= u <= 1:
        return -1.0
    return 0.0

def _overlap(s: float, first_derivative: bool) -> float:
    """Returns int_s^1 f(u) f(u - s) du with f the tent or its slope."""
    if s >= 1:
        return 0.0
    if first_derivative:
        integrand = lambda u: _tent_slope(u) * _tent_slope(u - s)
    else:
        integrand = lambda u: float(tent(u) * tent(u - s))
    breaks = [b for b in (0.5, s + 0.5) if s < b < 1]
    value, _ = integrate.quad(integrand, s, 1, points=breaks or None, limit=200)
    return value

@cache
def tent_constants() -> TentConstants:
    """Returns the integrals of the tent weight entering the pre-averaging variance."""
    def product(i: bool, j: bool) -> float:
        value, _ = integrate.quad(lambda s: _overlap(s, i) * _overlap(s, j), 0, 1, points=[0.5], limit=200)
        return value
    return TentConstants(
        psi1=_overlap(0.0, True),
        psi2=_overlap(0.0, False),
        phi11=product(True, True),
        phi12=product(True, False),
        phi22=product(False, False),
    )

def optimal_theta_factor() -> float:
    """Returns x* minimizing phi22 x + 2 phi12/x + phi11/x^3."""
    c = tent_constants()
    square = (2 * c.phi12 + math.sqrt(4 * c.phi12 ** 2 + 12 * c.phi22 * c.phi11)) / (2 * c.phi22)
    return math.sqrt(square)

def tune_baselines(inputs: AmiseInputs) -> tuple[TwoScaleConfig, PreAvgConfig]:
    """Returns two-scale and pre-averaging constants minimizing their asymptotic variances.

    The two-scale lag takes c_k = (12 xi^2 / (T IQ))^(1/3) and the window balances
    the local variance V against the drift gamma^2 h / 3 of the volatility. The
    pre-averaging window takes theta = x* sqrt(xi) / sigma and the bandwidth
    balances the kernel variance against the same drift. Both windows stay at
    two observations or more and at most half the session."""
    for name in ("iv", "iq", "ivv", "xi"):
        value = getattr(inputs, name)
        if not value > 0:
            raise InvalidParameter(name, value, "baseline tuning needs positive plug-ins")

    n, T, xi = inputs.n, inputs.T, inputs.xi
    n_rate = n / T
    sigma4 = inputs.iq / T
    sigma2 = math.sqrt(sigma4)
    drift = inputs.ivv / T

    # Two-scale
    ts_c_k = max((12 * xi ** 2 / (T * inputs.iq)) ** (1 / 3), 2.0 / n ** (2 / 3))
    lag = max(ts_c_k * n ** (2 / 3), 2.0)
    local_variance = 8 * xi ** 2 * n_rate / lag ** 2 + 4 / 3 * lag * sigma4 / n_rate
    window = math.sqrt(3 * local_variance / drift)
    window = min(max(window, 2 * lag / n_rate), T / 2)
    two_scale_cfg = TwoScaleConfig(c_k=ts_c_k, c_h=window * n ** (1 / 6))

    # Pre-averaging
    c = tent_constants()
    delta = T / n
    theta = optimal_theta_factor() * math.sqrt(xi) / math.sqrt(sigma2)
    pa_c_k = min(1 / theta, 1 / (2.5 * math.sqrt(delta)))
    theta = 1 / pa_c_k
    avar = 4 / c.psi2 ** 2 * (
        c.phi22 * theta * sigma4 + 2 * c.phi12 * sigma2 * xi / theta + c.phi11 * xi ** 2 / theta ** 3
    )
    c_m = min(math.sqrt(avar / drift), T / 2 / delta ** 0.25)
    preavg_cfg = PreAvgConfig(c_k=pa_c_k, c_m=c_m)

    logger.debug(
        f"Tuned two-scale k={two_scale_cfg.lag(n)} h={two_scale_cfg.window(n):.4g}d, "
        f"pre-averaging k={preavg_cfg.window(delta)} b={preavg_cfg.bandwidth(delta):.4g}d"
    )
    return two_scale_cfg, preavg_cfg
