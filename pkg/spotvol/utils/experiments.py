"""Per-path tasks of the Monte Carlo and data commands.

Every task is a module level function of plain arguments, so the harness can
hand it to worker processes, and draws its randomness from its own seed only.
"""
from __future__ import annotations

import logging
import math
import os
import numpy as np
import pandas as pd

from typing import Any, NamedTuple, Sequence

from spotvol.constants import SESSION_SECONDS
from spotvol.models.configs import EstimatorConfig, SelectorOptions
from spotvol.models.dynamics import ModelParams, NoiseSpec
from spotvol.models.exceptions import ValidationError
from spotvol.models.results import CltSpec, PathError
from spotvol.models.ticks import SessionSpec
from spotvol.utils.baselines import preaveraging_path, tune_baselines, two_scale_path
from spotvol.utils.file import write_table
from spotvol.utils.fourier import default_grid, estimate_path, price_coeffs, rescale_time, spot_from_coeffs
from spotvol.utils.ingestion import load_price_path, write_path, write_ticks
from spotvol.utils.metrics import (
    jarque_bera, path_error, return_midpoints, sample_moments, standardized_returns
)
from spotvol.utils.plugins import build_amise_inputs
from spotvol.utils.selector import select_params
from spotvol.utils.simulation import simulate

logger = logging.getLogger("SpotVol")

# Simulation

def write_simulated_path(
    out_dir: str,
    index: int,
    model: str,
    params: ModelParams,
    n: int,
    T_seconds: float,
    zeta: float,
    seed: int,
    session_date: str | None = None,
    return_std: float | None = None
) -> dict[str, Any]:
    """Simulates one path and writes it out, returning its file names and noise facts.

    Without a session date the clean prices, noisy prices and true variance go
    to three files; with one the noisy prices are written as the tick file of
    that trading day."""
    noise = NoiseSpec(zeta=zeta, return_std=return_std)
    path = simulate(model, n, T_seconds, seed, params=params, noise=noise)
    header = {"model": model, "seed": seed, "zeta": zeta, "xi": repr(path.xi)}
    if session_date is not None:
        name = f"{session_date}.csv"
        write_ticks(os.path.join(out_dir, name), path.noisy_prices.timestamps, np.exp(path.noisy_prices.logprices))
        files = [name]
    else:
        stem = f"path_{index:04d}"
        files = [f"{stem}_clean.csv", f"{stem}_noisy.csv", f"{stem}_true_var.csv"]
        write_path(os.path.join(out_dir, files[0]), path.prices, header)
        write_path(os.path.join(out_dir, files[1]), path.noisy_prices, header)
        truth = pd.DataFrame({"timestamp": path.true_var.grid, "variance": path.true_var.values})
        write_table(os.path.join(out_dir, files[2]), truth, {**header, "units": "variance per day"})
    return {
        "index": index, "seed": seed, "files": files,
        "xi": path.xi, "truncated_share": path.truncated_share,
    }

# Monte Carlo error sweeps

def sweep_path(
    model: str,
    params: ModelParams,
    n: int,
    T_seconds: float,
    zeta: float,
    seed: int,
    cells: Sequence[tuple[float, float]]
) -> list[PathError]:
    """Returns the path errors of the Fourier estimator at every (c, a) cell for one path.

    The price coefficients are computed once at the largest order the cells need."""
    path = simulate(model, n, T_seconds, seed, params=params, noise=NoiseSpec(zeta=zeta))
    noisy = path.noisy_prices
    grid = default_grid(noisy)
    truth = path.true_var.sample(grid)
    configs = [EstimatorConfig.from_constants(c, a, n) for c, a in cells]
    pc = price_coeffs(rescale_time(noisy), max(cfg.N + cfg.M for cfg in configs))
    return [path_error(spot_from_coeffs(noisy, pc, cfg, grid), truth) for cfg in configs]

class ComparisonSample(NamedTuple):
    fourier: PathError
    two_scale: PathError
    preavg: PathError
    N: int
    M: int
    converged: bool
    clamped: tuple[str, ...]

def compare_path(
    model: str,
    params: ModelParams,
    n: int,
    T_seconds: float,
    zeta: float,
    seed: int,
    c_lambda: float
) -> ComparisonSample:
    """Runs the adaptive Fourier estimator and both tuned baselines on one path."""
    path = simulate(model, n, T_seconds, seed, params=params, noise=NoiseSpec(zeta=zeta))
    noisy = path.noisy_prices
    grid = default_grid(noisy)
    truth = path.true_var.sample(grid)

    inputs = build_amise_inputs(noisy)
    selection = select_params(inputs, opts=SelectorOptions(c_lambda=c_lambda))
    two_scale_cfg, preavg_cfg = tune_baselines(inputs)
    return ComparisonSample(
        fourier=path_error(estimate_path(noisy, selection.config, grid), truth),
        two_scale=path_error(two_scale_path(noisy, two_scale_cfg, grid), truth),
        preavg=path_error(preaveraging_path(noisy, preavg_cfg, grid), truth),
        N=selection.N_star,
        M=selection.M_star,
        converged=selection.converged,
        clamped=inputs.clamped,
    )

def point_error(
    model: str,
    params: ModelParams,
    spec: CltSpec,
    n: int,
    seed: int,
    zeta: float = 0.0,
    T_seconds: float = SESSION_SECONDS
) -> float:
    """Returns the spot estimate minus the true variance at the evaluation time, per day."""
    path = simulate(model, n, T_seconds, seed, params=params, noise=NoiseSpec(zeta=zeta))
    t = spec.t_eval * path.prices.horizon
    estimate = float(estimate_path(path.noisy_prices, spec.cutoffs(n), [t]).values[0])
    return estimate - float(np.interp(t, path.true_var.grid, path.true_var.values))

# Empirical sessions

def empirical_day(
    session_date: str,
    source: str,
    session: SessionSpec,
    h_seconds: float,
    c_lambda: float
) -> dict[str, Any]:
    """Selects (N, M) for one trading day and tests its standardized returns for normality.

    Days whose estimate is not positive at every return interval are reported
    with the reason they were skipped instead of statistics."""
    row: dict[str, Any] = {"date": session_date}
    path = load_price_path(source, session)
    inputs = build_amise_inputs(path)
    selection = select_params(inputs, opts=SelectorOptions(c_lambda=c_lambda))
    row.update(
        n=path.n, N=selection.N_star, M=selection.M_star, converged=selection.converged,
        clamped=", ".join(inputs.clamped)
    )

    try:
        vol = estimate_path(path, selection.config, return_midpoints(path.horizon, h_seconds))
        returns = standardized_returns(path, vol, h_seconds)
        jb_stat, jb_pvalue = jarque_bera(returns)
    except ValidationError as e:
        logger.debug(f"Skipping session {session_date}: {e}")
        row["skipped"] = str(e)
        return row

    moments = sample_moments(returns)
    row.update(
        returns=returns.size, mean=moments.mean, variance=moments.variance,
        skewness=moments.skewness, kurtosis=moments.kurtosis,
        jb_stat=jb_stat, jb_pvalue=jb_pvalue, skipped=""
    )
    return row

def rmse(errors: Sequence[float]) -> float:
    values = np.asarray(errors, dtype=float)
    return math.sqrt(float(np.mean(values ** 2)))
