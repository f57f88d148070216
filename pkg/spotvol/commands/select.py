import argparse
import logging
import numpy as np
import pandas as pd

from typing_extensions import override

from spotvol.constants import (
    DEFAULT_C_LAMBDA, DEFAULT_MAX_ITERS, DEFAULT_THRESHOLD
)
from spotvol.harness import Command, Harness
from spotvol.models.configs import SelectorBox, SelectorOptions
from spotvol.utils.config import as_bool, as_float, as_int, as_str
from spotvol.utils.converters import add_plugin_arguments, add_session_arguments, plugin_overrides, session_option
from spotvol.utils.ingestion import load_price_path
from spotvol.utils.plugins import build_amise_inputs
from spotvol.utils.selector import c_amise, select_params

logger = logging.getLogger("SpotVol")

class SelectCommand(Command):
    name = "select"
    help = "Selects the cut-off frequencies N and M of one session by minimizing the c-AMISE."

    @override
    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--input", help="tick file (timestamp,price) or path file (timestamp,logprice)")
        parser.add_argument("--c-lambda", type=float, help=f"learning rate is c-lambda / xi, defaults to {DEFAULT_C_LAMBDA:g}")
        parser.add_argument("--learning-rate", type=float, help="fixed learning rate instead of c-lambda / xi")
        parser.add_argument("--threshold", type=float, help=f"relative change that stops the descent, defaults to {DEFAULT_THRESHOLD:g}")
        parser.add_argument("--max-iters", type=int, help=f"iteration cap, defaults to {DEFAULT_MAX_ITERS}")
        for bound in ("N-lo", "N-hi", "M-lo", "M-hi"):
            parser.add_argument(f"--{bound}", type=float, help="bound of the search box, the default box follows n")
        parser.add_argument("--bias-correction", action="store_true", default=None, help="remove the noise floor from the vol-of-vol plug-in")
        add_session_arguments(parser)
        add_plugin_arguments(parser)

    def _box(self, n: int) -> SelectorBox:
        h = self.harness
        default = SelectorBox.default(n)
        return SelectorBox(
            N_lo=h.option("N_lo", as_float, default.N_lo),
            N_hi=h.option("N_hi", as_float, default.N_hi),
            M_lo=h.option("M_lo", as_float, default.M_lo),
            M_hi=h.option("M_hi", as_float, default.M_hi),
        )

    @override
    async def run(self) -> None:
        h = self.harness
        source = h.option("input", as_str, None, required=True)
        path = load_price_path(source, session_option(h))
        inputs = build_amise_inputs(
            path,
            bias_correction=h.option("bias_correction", as_bool, False),
            overrides=plugin_overrides(h),
        )
        if inputs.clamped:
            logger.warning(f"Plug-ins {', '.join(inputs.clamped)} were floored before selection")

        box = self._box(path.n)
        opts = SelectorOptions(
            box=box,
            c_lambda=h.option("c_lambda", as_float, DEFAULT_C_LAMBDA),
            learning_rate=h.option("learning_rate", as_float, None),
            threshold=h.option("threshold", as_float, DEFAULT_THRESHOLD),
            max_iters=h.option("max_iters", as_int, DEFAULT_MAX_ITERS),
        )
        result = select_params(inputs, opts=opts)
        if result.stalled:
            logger.warning("Selection did not move from the corner of the box, the learning rate may be too small")
        elif not result.converged:
            logger.warning(f"Selection stopped after {result.iterations} steps without converging")
        logger.info(f"Selected N={result.N_star}, M={result.M_star} after {result.iterations} steps")

        summary = pd.DataFrame([{
            "N": result.N_star, "M": result.M_star,
            "objective": c_amise(inputs, result.N_star, result.M_star),
            "iterations": result.iterations, "converged": result.converged, "stalled": result.stalled,
            "learning_rate": result.learning_rate, "backtracks": result.backtracks,
            "iv": inputs.iv, "iq": inputs.iq, "ivv": inputs.ivv, "xi": inputs.xi,
        }])
        h.write_table("selection.csv", summary, {"units": "plug-ins per day, N and M as frequencies"})

        trace = pd.DataFrame({
            "iteration": np.arange(result.objective_trace.size),
            "N": result.N_path, "M": result.M_path, "objective": result.objective_trace,
        })
        h.write_table("selector_trace.csv", trace, {"box": f"[{box.N_lo:g}, {box.N_hi:g}] x [{box.M_lo:g}, {box.M_hi:g}]"})
        h.manifest.details.update(N=result.N_star, M=result.M_star, converged=result.converged)


async def setup(harness: Harness) -> None:
    harness.add_command(SelectCommand(harness))
