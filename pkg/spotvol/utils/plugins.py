"""Plug-in estimates of the integrated variance, quarticity, vol-of-vol and noise variance."""
from __future__ import annotations

import logging
import math
import numpy as np

from typing import Any, Mapping

from spotvol.constants import PLUGIN_FLOOR
from spotvol.models.configs import AmiseInputs
from spotvol.models.exceptions import ConfigurationError, InvalidParameter
from spotvol.models.paths import FourierCoeffs, PricePath
from spotvol.utils.fourier import TWO_PI, price_coeffs, rescale_time, vol_coeffs
from spotvol.utils.kernels import check_order

logger = logging.getLogger("SpotVol")

PLUGIN_KEYS = ("iv", "iq", "ivv", "xi")

def default_orders(n: int) -> tuple[int, int]:
    """Returns the default (N_iv, M) = (floor(sqrt(n)), floor(sqrt(N_iv)))."""
    N_iv = max(math.isqrt(n), 1)
    return N_iv, max(math.isqrt(N_iv), 1)

def _check_orders(path: PricePath, N_iv: int, M: int, name: str) -> None:
    check_order(N_iv, "N_iv")
    check_order(M, name)
    if not 1 <= N_iv < path.n:
        raise InvalidParameter("N_iv", N_iv, f"must lie in [1, {path.n - 1}]")
    if M > N_iv:
        raise InvalidParameter(name, M, f"must not exceed N_iv={N_iv}")

def _variance_coeffs(path: PricePath, N_iv: int, M: int) -> FourierCoeffs:
    """Returns the rescaled-time variance coefficients up to order M."""
    pc = price_coeffs(rescale_time(path), N_iv + M)
    return vol_coeffs(pc, N_iv, M)

def noise_variance(path: PricePath) -> float:
    """Returns the realized variance over twice the number of increments."""
    increments = path.increments
    return float(increments @ increments) / (2 * path.n)

def integrated_variance(path: PricePath, N_iv: int | None = None) -> float:
    """Returns 2pi c_0 of the variance coefficients with cut-off N_iv."""
    if N_iv is None:
        N_iv, _ = default_orders(path.n)
    _check_orders(path, N_iv, 0, "M")
    return float(TWO_PI * _variance_coeffs(path, N_iv, 0)[0].real)

def _quarticity(vc: FourierCoeffs, M_q: int, path: PricePath) -> float:
    c = vc.truncated(M_q).values
    # c_{-k} = conj(c_k)
    return float(TWO_PI * np.sum(np.abs(c) ** 2)) * TWO_PI / path.horizon_days

def _volvol(vc: FourierCoeffs, M_v: int, path: PricePath, bias_correction: bool) -> float:
    power = np.abs(vc.values) ** 2
    k = vc.frequencies
    inner = np.abs(k) <= M_v
    if bias_correction:
        # Mean power beyond M_v measures the noise level of the coefficients
        floor = float(power[(np.abs(k) > M_v)].mean())
        power = power - floor
    total = float(np.sum(k[inner] ** 2 * power[inner]))
    return TWO_PI ** 2 / (2 * M_v + 1) * total * (TWO_PI / path.horizon_days) ** 2

def integrated_quarticity(path: PricePath, N_iv: int | None = None, M_q: int | None = None) -> float:
    """Returns 2pi sum_{|k|<=M_q} c_k c_{-k}, per day."""
    default_N, default_M = default_orders(path.n)
    N_iv = default_N if N_iv is None else N_iv
    M_q = default_M if M_q is None else M_q
    _check_orders(path, N_iv, M_q, "M_q")
    return _quarticity(_variance_coeffs(path, N_iv, M_q), M_q, path)

def integrated_volvol(
    path: PricePath,
    N_iv: int | None = None,
    M_v: int | None = None,
    *,
    bias_correction: bool = False
) -> float:
    """Returns (2pi)^2/(2M_v+1) sum_{|k|<=M_v} k^2 c_k c_{-k}, per day.

    With bias_correction the mean power of the coefficients at M_v < |k| <= 2 M_v
    is subtracted from every term first. The result can then be negative."""
    default_N, default_M = default_orders(path.n)
    N_iv = default_N if N_iv is None else N_iv
    M_v = default_M if M_v is None else M_v
    if M_v < 1:
        raise InvalidParameter("M_v", M_v, "must be at least 1")
    _check_orders(path, N_iv, M_v, "M_v")
    order = 2 * M_v if bias_correction else M_v
    if order > N_iv:
        raise InvalidParameter("M_v", M_v, f"bias correction needs 2 M_v <= N_iv={N_iv}")
    return _volvol(_variance_coeffs(path, N_iv, order), M_v, path, bias_correction)

def parse_overrides(values: Mapping[str, Any]) -> dict[str, float]:
    """Picks the plug-in overrides out of a configuration mapping."""
    overrides: dict[str, float] = {}
    for key in PLUGIN_KEYS:
        if values.get(key) is None:
            continue
        try:
            overrides[key] = float(values[key])
        except (TypeError, ValueError):
            raise ConfigurationError(f"plug-in override {key!r} must be a number, got {values[key]!r}")
    return overrides

def build_amise_inputs(
    path: PricePath,
    T: float | None = None,
    *,
    N_iv: int | None = None,
    M_q: int | None = None,
    M_v: int | None = None,
    bias_correction: bool = False,
    overrides: Mapping[str, float] | None = None
) -> AmiseInputs:
    """Assembles the four plug-ins of a path, flooring values below the plug-in floor.

    T defaults to the session length in days. Overrides replace the estimates
    of the named plug-ins verbatim."""
    if T is None:
        T = path.horizon_days
    default_N, default_M = default_orders(path.n)
    N_iv = default_N if N_iv is None else N_iv
    M_q = default_M if M_q is None else M_q
    M_v = default_M if M_v is None else M_v
    _check_orders(path, N_iv, max(M_q, M_v), "M")
    order = max(M_q, 2 * M_v if bias_correction else M_v)
    if order > N_iv:
        raise InvalidParameter("M_v", M_v, f"bias correction needs 2 M_v <= N_iv={N_iv}")

    overrides = dict(overrides or {})
    values: dict[str, float] = {}
    if set(("iv", "iq", "ivv")) - set(overrides):
        vc = _variance_coeffs(path, N_iv, order)
        values["iv"] = float(TWO_PI * vc[0].real)
        values["iq"] = _quarticity(vc, M_q, path)
        values["ivv"] = _volvol(vc, M_v, path, bias_correction)
    values["xi"] = noise_variance(path)
    values.update(overrides)

    clamped: list[str] = []
    for key in PLUGIN_KEYS:
        if not math.isfinite(values[key]):
            raise InvalidParameter(key, values[key], "plug-in estimate is not finite")
        if values[key] < PLUGIN_FLOOR:
            values[key] = PLUGIN_FLOOR
            clamped.append(key)
    if clamped:
        logger.debug(f"Plug-in estimates {', '.join(clamped)} fell below {PLUGIN_FLOOR:g} and were floored")

    return AmiseInputs(
        iv=values["iv"], iq=values["iq"], ivv=values["ivv"], xi=values["xi"],
        n=path.n, T=T, clamped=tuple(clamped)
    )
