"""Error metrics, normality tests and Monte Carlo checks of the limit theorems."""
from __future__ import annotations

import logging
import math
import numpy as np

from scipy import stats
from typing import TYPE_CHECKING, NamedTuple, Sequence

from spotvol.constants import NORMAL_Q975, SESSION_SECONDS
from spotvol.models.dynamics import ConstantVolParams, HestonParams, ModelParams, NoiseSpec, Sv1fParams
from spotvol.models.exceptions import InvalidGrid, InvalidParameter
from spotvol.models.paths import PricePath, SpotVolPath
from spotvol.models.results import CltResult, CltSpec, PathError, Regime
from spotvol.utils.fourier import TWO_PI, estimate_path
from spotvol.utils.kernels import k_constant
from spotvol.utils.plugins import default_orders, integrated_volvol, noise_variance
from spotvol.utils.simulation import simulate

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger("SpotVol")

def _cell_widths(grid: NDArray[np.float64], horizon: float) -> NDArray[np.float64]:
    """Returns the widths of the cells [0, g_1), [g_1, g_2), ..., [g_{L-1}, T]."""
    edges = np.concatenate(([0.0], grid[1:], [horizon]))
    return np.diff(edges)

def path_error(est: SpotVolPath, truth: SpotVolPath) -> PathError:
    """Returns the left Riemann sums of the squared and absolute deviations, in days.

    Each grid value stands for the cell up to the next grid point; the first
    cell reaches back to 0 and the last one up to the horizon."""
    if est.grid.shape != truth.grid.shape or not np.allclose(est.grid, truth.grid, rtol=0, atol=1e-9 * est.horizon):
        raise InvalidGrid("estimated and true paths must share their grid")
    if not math.isclose(est.horizon, truth.horizon) or not math.isclose(est.day_length, truth.day_length):
        raise InvalidGrid("estimated and true paths must share horizon and day length")
    widths = _cell_widths(est.grid, est.horizon) / est.day_length
    deviation = est.values - truth.values
    return PathError(ise=float(widths @ deviation ** 2), iae=float(widths @ np.abs(deviation)))

class ErrorSummary(NamedTuple):
    mise: float
    miae: float
    mise_se: float
    miae_se: float
    paths: int

def summarize_errors(errors: Sequence[PathError]) -> ErrorSummary:
    """Returns the Monte Carlo means of the path errors with their standard errors."""
    if not errors:
        raise InvalidParameter("errors", 0, "need at least one path error")
    ise = np.array([e.ise for e in errors])
    iae = np.array([e.iae for e in errors])
    count = ise.size
    spread = (lambda x: float(np.std(x, ddof=1) / math.sqrt(count))) if count > 1 else (lambda x: 0.0)
    return ErrorSummary(float(ise.mean()), float(iae.mean()), spread(ise), spread(iae), count)

# Limit theorems

def asymptotic_variance(spec: CltSpec, sigma2: float, gamma2: float, xi: float) -> float:
    """Returns the asymptotic variance of the normalized spot estimate in the regime of spec.

    Inputs are in rescaled time, where the session spans 2pi."""
    c, a = spec.c, spec.a
    sigma4 = sigma2 ** 2
    match spec.regime:
        case Regime.NO_NOISE_SUBOPT:
            return 4 / 3 * (1 + 2 * k_constant(2 * c)) * sigma4
        case Regime.NO_NOISE_OPT:
            return 4 / 3 * (1 + 2 * k_constant(2 * c)) * sigma4 + TWO_PI / (3 * a ** 2) * gamma2
        case Regime.NOISE_SUBOPT:
            return 2 / (3 * c) * sigma4 + c * TWO_PI / 9 * sigma2 * xi + c ** 3 * 4 * math.pi ** 2 / 15 * xi ** 2
        case Regime.NOISE_OPT:
            return (
                2 / (3 * c) * sigma4 + TWO_PI / (3 * a ** 2 * c) * gamma2
                + c * TWO_PI / 9 * sigma2 * xi + c ** 3 * 4 * math.pi ** 2 / 15 * xi ** 2
            )

def spot_volvol(params: ModelParams, sigma2: float) -> float:
    """Returns the spot variance of the variance process, gamma^2(t), per day."""
    match params:
        case Sv1fParams():
            # d sigma^2 = ... + 2 beta1 sigma^2 dZ
            return 4 * params.beta1 ** 2 * sigma2 ** 2
        case HestonParams():
            return params.gamma ** 2 * sigma2
        case ConstantVolParams():
            return 0.0

def _to_rescaled(sigma2: float, gamma2: float, horizon_days: float) -> tuple[float, float]:
    """Converts spot variance and vol-of-vol per day to the [0, 2pi] clock."""
    unit = horizon_days / TWO_PI
    return sigma2 * unit, gamma2 * unit ** 3

def clt_statistic(
    model: str,
    params: ModelParams,
    spec: CltSpec,
    n: int,
    seed: int,
    zeta: float = 0.0,
    *,
    feasible: bool = False,
    T_seconds: float = SESSION_SECONDS
) -> float:
    """Simulates one path and returns rate (estimate - truth) / sqrt(avar) at t_eval."""
    path = simulate(model, n, T_seconds, seed, params=params, noise=NoiseSpec(zeta=zeta))
    cfg = spec.cutoffs(n)
    if cfg.M < 1:
        raise InvalidParameter("a", spec.a, f"gives M={cfg.M} at n={n}")
    t = spec.t_eval * path.prices.horizon
    estimate = float(estimate_path(path.noisy_prices, cfg, [t]).values[0])
    truth = float(np.interp(t, path.true_var.grid, path.true_var.values))
    days = path.prices.horizon_days

    if feasible:
        sigma2 = max(estimate, 0.0)
        xi = noise_variance(path.noisy_prices) if spec.regime.noisy else 0.0
        N_iv, M_v = default_orders(n)
        gamma2 = max(integrated_volvol(path.noisy_prices, N_iv, M_v), 0.0) / days
    else:
        sigma2, xi = truth, path.xi
        gamma2 = spot_volvol(params, truth)

    sigma2_r, gamma2_r = _to_rescaled(sigma2, gamma2, days)
    avar = asymptotic_variance(spec, sigma2_r, gamma2_r, xi)
    if not avar > 0:
        raise InvalidParameter("avar", avar, "asymptotic variance must be positive")
    difference = (estimate - truth) * days / TWO_PI
    return spec.rate(n, cfg.M) * difference / math.sqrt(avar)

def summarize_clt(
    spec: CltSpec, n: int, z: ArrayLike, *, feasible: bool = False, avar_scale: float = 1.0
) -> CltResult:
    """Builds the KS, JB and coverage summary of normalized errors.

    avar_scale multiplies the asymptotic variance, so 0.5 gives the halved-variance control."""
    if not avar_scale > 0:
        raise InvalidParameter("avar_scale", avar_scale, "must be positive")
    values = np.asarray(z, dtype=float) / math.sqrt(avar_scale)
    cfg = spec.cutoffs(n)
    ks_stat, ks_pvalue = ks_normal(values)
    jb_stat, jb_pvalue = jarque_bera(values)
    return CltResult(
        spec=spec, n=n, N=cfg.N, M=cfg.M, n_paths=values.size,
        ks_stat=ks_stat, ks_pvalue=ks_pvalue, jb_stat=jb_stat, jb_pvalue=jb_pvalue,
        coverage_95=float(np.mean(np.abs(values) <= NORMAL_Q975)),
        mean_z=float(values.mean()), var_z=float(values.var(ddof=1)),
        feasible=feasible, avar_scale=avar_scale, z=tuple(values.tolist())
    )

def check_clt_inputs(spec: CltSpec, n: int, n_paths: int, zeta: float = 0.0) -> None:
    """Raises InvalidParameter unless the run has enough paths and M >= 4."""
    if n_paths < 8:
        raise InvalidParameter("n_paths", n_paths, "must be at least 8")
    if spec.cutoffs(n).M < 4:
        raise InvalidParameter("n", n, f"is too small for M >= 4 in regime {spec.regime.value}")
    if spec.regime.noisy and zeta == 0:
        logger.warning("Noise regime checked on noiseless paths")

def clt_check(
    model: str,
    params: ModelParams,
    spec: CltSpec,
    n: int,
    n_paths: int,
    seed: int,
    zeta: float = 0.0,
    *,
    feasible: bool = False,
    avar_scale: float = 1.0,
    T_seconds: float = SESSION_SECONDS
) -> CltResult:
    """Runs n_paths simulations with seeds seed, seed + 1, ... and summarizes their statistics."""
    check_clt_inputs(spec, n, n_paths, zeta)
    z = [
        clt_statistic(model, params, spec, n, seed + i, zeta, feasible=feasible, T_seconds=T_seconds)
        for i in range(n_paths)
    ]
    return summarize_clt(spec, n, z, feasible=feasible, avar_scale=avar_scale)

def log_log_slope(sizes: ArrayLike, errors: ArrayLike) -> float:
    """Returns the least squares slope of log error against log size."""
    x = np.log(np.asarray(sizes, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    if x.size < 2:
        raise InvalidParameter("sizes", x.size, "need at least two sizes for a slope")
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)

# Standardized returns

def return_midpoints(horizon: float, h: float) -> NDArray[np.float64]:
    """Returns the midpoints of the intervals [0, h], [h, 2h], ... inside the horizon."""
    if not 0 < h <= horizon:
        raise InvalidParameter("h", h, f"must lie in (0, {horizon:g}]")
    count = int(math.floor(horizon / h + 1e-9))
    return h * (np.arange(count) + 0.5)

def standardized_returns(path: PricePath, vol: SpotVolPath, h: float) -> NDArray[np.float64]:
    """Returns (p(t + h) - p(t)) / sqrt(sigma2 h) over consecutive intervals of length h.

    h is in the path's time unit; the variance of each interval is the estimate
    at its midpoint, which must be the grid of vol."""
    midpoints = return_midpoints(path.horizon, h)
    if vol.grid.shape != midpoints.shape or not np.allclose(vol.grid, midpoints, rtol=0, atol=1e-9 * h):
        raise InvalidGrid("spot variance must be given at the midpoints of the return intervals")
    if np.any(vol.values <= 0):
        bad = float(vol.grid[np.argmax(vol.values <= 0)])
        raise InvalidParameter("variance", bad, "spot variance must be positive at every interval")

    edges = np.concatenate((midpoints - h / 2, [midpoints[-1] + h / 2]))
    # Last observation at or before each edge
    index = np.searchsorted(path.timestamps, edges + 1e-9 * h, side="right") - 1
    prices = path.logprices[np.clip(index, 0, None)]
    returns = np.diff(prices)
    return returns / np.sqrt(vol.values * h / path.day_length)

# Normality

def jarque_bera(sample: ArrayLike) -> tuple[float, float]:
    """Returns the Jarque-Bera statistic with non-excess kurtosis and its chi-squared(2) p-value."""
    values = np.asarray(sample, dtype=float)
    if values.size < 8:
        raise InvalidParameter("sample", values.size, "Jarque-Bera needs at least 8 values")
    if np.ptp(values) == 0:
        raise InvalidParameter("sample", float(values[0]), "Jarque-Bera is undefined for a constant sample")
    skewness = float(stats.skew(values))
    kurtosis = float(stats.kurtosis(values, fisher=False))
    statistic = values.size / 6 * (skewness ** 2 + (kurtosis - 3) ** 2 / 4)
    return statistic, float(stats.chi2.sf(statistic, 2))

def ks_normal(sample: ArrayLike) -> tuple[float, float]:
    """Returns the Kolmogorov-Smirnov distance to the standard Normal and its p-value."""
    result = stats.kstest(np.asarray(sample, dtype=float), cdf="norm")
    return float(result.statistic), float(result.pvalue)

class Moments(NamedTuple):
    mean: float
    variance: float
    skewness: float
    kurtosis: float

def sample_moments(sample: ArrayLike) -> Moments:
    """Returns mean, variance, skewness and non-excess kurtosis."""
    values = np.asarray(sample, dtype=float)
    return Moments(
        float(values.mean()), float(values.var(ddof=1)),
        float(stats.skew(values)), float(stats.kurtosis(values, fisher=False))
    )
