import argparse
import logging
import pandas as pd

from typing_extensions import override

from spotvol.constants import DEFAULT_C_LAMBDA
from spotvol.harness import Command, Harness
from spotvol.models.configs import EstimatorConfig, PreAvgConfig, SelectorOptions, TwoScaleConfig
from spotvol.models.exceptions import ConfigurationError
from spotvol.models.paths import PricePath, SpotVolPath
from spotvol.utils.baselines import preaveraging_path, tune_baselines, two_scale_path
from spotvol.utils.config import as_bool, as_float, as_int, as_str
from spotvol.utils.converters import (
    add_plugin_arguments, add_session_arguments, evaluation_grid, plugin_overrides, session_option
)
from spotvol.utils.fourier import estimate_path, realized_fejer_spot
from spotvol.utils.ingestion import load_price_path
from spotvol.utils.plugins import build_amise_inputs
from spotvol.utils.selector import select_params

logger = logging.getLogger("SpotVol")

METHODS = ("fourier", "two-scale", "preavg", "fejer-kernel")

class EstimateCommand(Command):
    name = "estimate"
    help = "Estimates the spot variance path of one session."

    @override
    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--input", help="tick file (timestamp,price) or path file (timestamp,logprice)")
        parser.add_argument("--method", choices=METHODS, help="estimator, defaults to fourier")
        parser.add_argument("--N", type=int, help="convolution cut-off of the Fourier estimator")
        parser.add_argument("--M", type=int, help="inversion cut-off of the Fourier and Fejér-kernel estimators")
        parser.add_argument("--adaptive", action="store_true", default=None, help="select N and M by minimizing the c-AMISE")
        parser.add_argument("--c-lambda", type=float, help="learning rate constant of the selector")
        parser.add_argument("--c-k", type=float, help="lag or pre-averaging window constant of the baselines")
        parser.add_argument("--c-h", type=float, help="window constant of the two-scale estimator")
        parser.add_argument("--c-m", type=float, help="bandwidth constant of the pre-averaging estimator")
        parser.add_argument("--grid", help="comma separated evaluation times in seconds since the open")
        parser.add_argument("--grid-step", type=float, help="spacing of the default grid in seconds, defaults to 60")
        parser.add_argument("--truncate", action="store_true", default=None, help="replace negative estimates by 0")
        add_session_arguments(parser)
        add_plugin_arguments(parser)

    def _fourier_config(self, path: PricePath) -> tuple[EstimatorConfig, dict[str, object]]:
        h = self.harness
        if h.option("adaptive", as_bool, False):
            inputs = build_amise_inputs(path, overrides=plugin_overrides(h))
            if inputs.clamped:
                logger.warning(f"Plug-ins {', '.join(inputs.clamped)} were floored before selection")
            selection = select_params(inputs, opts=SelectorOptions(c_lambda=h.option("c_lambda", as_float, DEFAULT_C_LAMBDA)))
            if not selection.converged:
                logger.warning(f"Selection stopped after {selection.iterations} steps without converging")
            logger.info(f"Selected N={selection.N_star}, M={selection.M_star}")
            return selection.config, {"selected": "adaptive", "iterations": selection.iterations}

        N = h.option("N", as_int, None)
        M = h.option("M", as_int, None)
        if N is None or M is None:
            raise ConfigurationError("method fourier needs --N and --M, or --adaptive")
        return EstimatorConfig(N=N, M=M), {"selected": "explicit"}

    def _explicit_constants(self, window_key: str) -> tuple[float, float] | None:
        """Returns (c_k, window constant) when both are given, None when both are left to tuning."""
        h = self.harness
        c_k = h.option("c_k", as_float, None)
        window = h.option(window_key, as_float, None)
        if c_k is not None and window is not None:
            return c_k, window
        if c_k is not None or window is not None:
            raise ConfigurationError(f"give both --c-k and --{window_key.replace('_', '-')}, or neither to tune them")
        return None

    def _tuned(self, path: PricePath) -> tuple[TwoScaleConfig, PreAvgConfig]:
        return tune_baselines(build_amise_inputs(path, overrides=plugin_overrides(self.harness)))

    def _two_scale_config(self, path: PricePath) -> TwoScaleConfig:
        explicit = self._explicit_constants("c_h")
        return TwoScaleConfig(*explicit) if explicit else self._tuned(path)[0]

    def _preavg_config(self, path: PricePath) -> PreAvgConfig:
        explicit = self._explicit_constants("c_m")
        return PreAvgConfig(*explicit) if explicit else self._tuned(path)[1]

    def estimate(self, path: PricePath, method: str) -> tuple[SpotVolPath, dict[str, object]]:
        grid = evaluation_grid(self.harness, path)
        match method:
            case "fourier":
                cfg, facts = self._fourier_config(path)
                return estimate_path(path, cfg, grid), {**facts, "N": cfg.N, "M": cfg.M}
            case "fejer-kernel":
                M = self.harness.option("M", as_int, None, required=True)
                return realized_fejer_spot(path, M, grid), {"M": M}
            case "two-scale":
                cfg = self._two_scale_config(path)
                return two_scale_path(path, cfg, grid), {"k": cfg.lag(path.n), "h_days": cfg.window(path.n)}
            case "preavg":
                cfg = self._preavg_config(path)
                delta = path.horizon_days / path.n
                return preaveraging_path(path, cfg, grid), {"k": cfg.window(delta), "bandwidth_days": cfg.bandwidth(delta)}
            case _:
                raise ConfigurationError(f"unknown method {method!r}, expected one of {', '.join(METHODS)}")

    @override
    async def run(self) -> None:
        h = self.harness
        source = h.option("input", as_str, None, required=True)
        method = h.option("method", as_str, "fourier")
        path = load_price_path(source, session_option(h))
        logger.info(f"Loaded {path.n} increments from {source}")

        estimate, facts = self.estimate(path, method)
        negatives = int(estimate.negative_mask.sum())
        if h.option("truncate", as_bool, False):
            estimate = estimate.truncated()
        elif negatives:
            logger.warning(f"{negatives} of {len(estimate)} spot estimates are negative")

        frame = pd.DataFrame({"time": estimate.grid, "variance": estimate.values})
        h.write_table("spot_variance.csv", frame, {
            **facts, "negatives": negatives,
            "units": "time in seconds since the open, variance per day",
        })
        h.manifest.details.update(facts)

async def setup(harness: Harness) -> None:
    harness.add_command(EstimateCommand(harness))
