"""Fourier estimator of the spot variance.

Price increments are turned into Fourier coefficients on the session rescaled
to [0, 2pi], the coefficients of the variance follow from the convolution
formula with cut-off N, and the spot variance is recovered by Fejér-weighted
inversion with cut-off M. Everything in this module works in rescaled time
until estimate_path converts back to variance per day.
"""
from __future__ import annotations

import logging
import math
import numpy as np

from typing import TYPE_CHECKING

from spotvol.constants import DEFAULT_GRID_STEP, IMAGINARY_TOLERANCE, SESSION_SECONDS
from spotvol.models.configs import EstimatorConfig
from spotvol.models.exceptions import (
    ImaginaryResidue, InvalidGrid, InvalidParameter, NonFiniteResult
)
from spotvol.models.paths import FourierCoeffs, PricePath, SpotVolPath
from spotvol.utils.kernels import check_order, fejer_weights

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger("SpotVol")

TWO_PI = 2 * math.pi

# Frequencies per block of the direct sum
_FREQUENCY_BLOCK = 64

def rescale_time(path: PricePath) -> PricePath:
    """Maps the session affinely onto [0, 2pi], keeping log-prices and the day unit."""
    scale = TWO_PI / path.horizon
    return PricePath(
        path.timestamps * scale, path.logprices, TWO_PI,
        day_length=path.day_length * scale
    )

def variance_day_factor(path: PricePath) -> float:
    """Returns the factor turning variance per rescaled time unit into variance per day."""
    return TWO_PI / path.horizon_days

def fourier_sums(times: NDArray[np.float64], amounts: NDArray[np.float64], order: int, *, equispaced: bool = False) -> FourierCoeffs:
    """Returns (1/2pi) sum_j exp(-i k t_j) amounts_j for k = -order..order.

    Times must be in radians. With equispaced set, times are taken to be
    2pi j/len(amounts) and the sums come from one FFT."""
    order = check_order(order, "H")
    values = np.empty(2 * order + 1, dtype=complex)
    if equispaced:
        spectrum = np.fft.fft(amounts)
        values[:] = spectrum[np.arange(-order, order + 1) % amounts.size]
    else:
        values[order] = amounts.sum()
        for start in range(1, order + 1, _FREQUENCY_BLOCK):
            k = np.arange(start, min(start + _FREQUENCY_BLOCK, order + 1))
            block = np.exp(-1j * np.multiply.outer(k, times)) @ amounts
            values[order + k] = block
            values[order - k] = np.conj(block)
    return FourierCoeffs(order, values / TWO_PI)

def price_coeffs(path: PricePath, H: int, *, use_fft: bool | None = None) -> FourierCoeffs:
    """Returns the Fourier coefficients of the price increments of a path on [0, 2pi].

    The FFT is used on equispaced paths unless use_fft says otherwise."""
    if not math.isclose(path.horizon, TWO_PI):
        raise InvalidParameter("horizon", path.horizon, "price coefficients need a path rescaled to [0, 2pi]")
    if use_fft is None:
        use_fft = path.is_equispaced()
    return fourier_sums(path.timestamps[:-1], path.increments, H, equispaced=use_fft)

def vol_coeffs(pc: FourierCoeffs, N: int, M: int) -> FourierCoeffs:
    """Returns the coefficients of the variance for |k| <= M from the convolution formula.

    c_k = 2pi/(2N+1) sum_{|h|<=N} c_h c_{k-h}"""
    N = check_order(N, "N")
    M = check_order(M, "M")
    H = pc.order
    if H < N + M:
        raise InvalidParameter("H", H, f"price coefficients need order at least N + M = {N + M}")

    c = pc.values
    left = c[H - N:H + N + 1]
    out = np.empty(2 * M + 1, dtype=complex)
    for k in range(-M, M + 1):
        # c_{k-h} for h = -N..N, read backwards
        right = c[H + k - N:H + k + N + 1][::-1]
        out[k + M] = left @ right
    return FourierCoeffs(M, out * (TWO_PI / (2 * N + 1)))

def _check_interior(t: NDArray[np.float64], upper: float, what: str) -> None:
    if not np.all(np.isfinite(t)):
        raise InvalidGrid(f"{what} contains non-finite times")
    if np.any(t <= 0) or np.any(t >= upper):
        bad = t[(t <= 0) | (t >= upper)][0]
        raise InvalidGrid(f"{what} point {bad:g} is not strictly inside (0, {upper:g})")

def invert(vc: FourierCoeffs, t: ArrayLike) -> float | NDArray[np.float64]:
    """Returns the Fejér-weighted inverse sum_{|k|<=M} (1 - |k|/(M+1)) exp(itk) c_k at t in (0, 2pi)."""
    points = np.asarray(t, dtype=float)
    _check_interior(np.atleast_1d(points), TWO_PI, "inversion time")

    weighted = fejer_weights(vc.order) * vc.values
    raw = np.exp(1j * np.multiply.outer(np.atleast_1d(points), vc.frequencies)) @ weighted
    real = raw.real
    residue = np.abs(raw.imag)
    limit = IMAGINARY_TOLERANCE * (1 + np.abs(real))
    if np.any(residue > limit):
        worst = int(np.argmax(residue - limit))
        raise ImaginaryResidue(float(residue[worst]), float(real[worst]))
    if not np.all(np.isfinite(real)):
        raise NonFiniteResult("inverted spot variance")
    if points.ndim == 0:
        return float(real[0])
    return real

def interior_grid(horizon: float, step: float = DEFAULT_GRID_STEP) -> NDArray[np.float64]:
    """Returns the points step, 2 step, ... strictly inside (0, horizon)."""
    if not step > 0:
        raise InvalidParameter("step", step, "must be positive")
    count = math.ceil(horizon / step) - 1
    grid = step * np.arange(1, count + 1)
    return grid[grid < horizon]

def validate_grid(grid: ArrayLike, horizon: float) -> NDArray[np.float64]:
    """Returns the grid as an array, raising InvalidGrid unless it is increasing and interior."""
    points = np.asarray(grid, dtype=float)
    if points.ndim != 1 or points.size == 0:
        raise InvalidGrid("evaluation grid must be a non-empty one-dimensional array")
    _check_interior(points, horizon, "evaluation grid")
    if np.any(np.diff(points) <= 0):
        raise InvalidGrid("evaluation grid must be strictly increasing")
    return points

def spot_from_coeffs(path: PricePath, pc: FourierCoeffs, cfg: EstimatorConfig, grid: NDArray[np.float64]) -> SpotVolPath:
    """Returns the spot variance path of cfg from price coefficients computed once for path.

    Lets sweeps over (N, M) share one coefficient computation."""
    cfg.validate_for(path.n)
    vc = vol_coeffs(pc, cfg.N, cfg.M)
    values = invert(vc, grid * (TWO_PI / path.horizon)) * variance_day_factor(path)
    estimate = SpotVolPath(grid, values, path.horizon, day_length=path.day_length)
    negatives = int(np.count_nonzero(estimate.negative_mask))
    if negatives:
        logger.debug(f"{negatives} of {grid.size} spot estimates are negative for N={cfg.N}, M={cfg.M}")
    return estimate

def estimate_path(path: PricePath, cfg: EstimatorConfig, grid: ArrayLike | None = None) -> SpotVolPath:
    """Returns the Fourier spot variance of path at each grid time, in variance per day.

    Clean and noisy prices go through the same computation. The default grid is
    every minute strictly inside the session."""
    cfg.validate_for(path.n)
    if grid is None:
        grid = default_grid(path)
    points = validate_grid(grid, path.horizon)
    pc = price_coeffs(rescale_time(path), cfg.N + cfg.M)
    return spot_from_coeffs(path, pc, cfg, points)

def realized_fejer_spot(path: PricePath, M: int, grid: ArrayLike | None = None) -> SpotVolPath:
    """Returns (1/2pi) sum_j F_M(t - t_j) delta_j^2, the estimator without cross products of increments."""
    M = check_order(M, "M")
    if M < 1:
        raise InvalidParameter("M", M, "must be at least 1")
    if grid is None:
        grid = default_grid(path)
    points = validate_grid(grid, path.horizon)
    rescaled = rescale_time(path)
    squares = fourier_sums(
        rescaled.timestamps[:-1], path.increments ** 2, M, equispaced=rescaled.is_equispaced()
    )
    values = invert(squares, points * (TWO_PI / path.horizon)) * variance_day_factor(path)
    return SpotVolPath(points, values, path.horizon, day_length=path.day_length)

def default_grid(path: PricePath) -> NDArray[np.float64]:
    """Returns one point per trading minute strictly inside the session, in the path's time unit."""
    return interior_grid(path.horizon, DEFAULT_GRID_STEP * path.day_length / SESSION_SECONDS)
