import argparse
import logging
import numpy as np
import pandas as pd

from typing_extensions import override

from spotvol.constants import DEFAULT_C_LAMBDA, SESSION_SECONDS
from spotvol.harness import Command, Harness
from spotvol.models.dynamics import model_params
from spotvol.models.exceptions import ConfigurationError
from spotvol.utils.config import as_float, as_int, as_str, list_of
from spotvol.utils.experiments import ComparisonSample, compare_path
from spotvol.utils.metrics import summarize_errors

logger = logging.getLogger("SpotVol")

def comparison_rows(model: str, zeta: float, samples: list[ComparisonSample]) -> list[dict[str, object]]:
    """Summarizes the path errors of the three estimators on one scenario."""
    summaries = {
        "fourier": summarize_errors([s.fourier for s in samples]),
        "preavg": summarize_errors([s.preavg for s in samples]),
        "two-scale": summarize_errors([s.two_scale for s in samples]),
    }
    ratio = summaries["fourier"].mise / summaries["preavg"].mise
    mean_N = float(np.mean([s.N for s in samples]))
    mean_M = float(np.mean([s.M for s in samples]))
    return [
        {
            "model": model, "zeta": zeta, "estimator": name,
            "mise": summary.mise, "miae": summary.miae,
            "mise_se": summary.mise_se, "miae_se": summary.miae_se, "paths": summary.paths,
            "mean_N": mean_N, "mean_M": mean_M, "fourier_to_preavg_mise": ratio,
        }
        for name, summary in summaries.items()
    ]

class CompareCommand(Command):
    name = "compare"
    help = "Compares the adaptive Fourier estimator with the tuned two-scale and pre-averaging estimators."

    @override
    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--models", help="comma separated models, defaults to sv1f,heston")
        parser.add_argument("--zetas", help="comma separated noise-to-signal ratios, defaults to 1,2,3")
        parser.add_argument("--n", type=int, help="number of increments per path, defaults to 23400")
        parser.add_argument("--T", type=float, help="session length in seconds, defaults to 23400")
        parser.add_argument("--n-paths", type=int, help="paths per scenario, defaults to 200")
        parser.add_argument("--seed", type=int, help="seed of the first path, path i uses seed + i")
        parser.add_argument("--c-lambda", type=float, help=f"learning rate constant of the selector, defaults to {DEFAULT_C_LAMBDA:g}")

    @override
    async def run(self) -> None:
        h = self.harness
        models = h.option("models", list_of(as_str), ["sv1f", "heston"])
        zetas = h.option("zetas", list_of(as_float), [1.0, 2.0, 3.0])
        n = h.option("n", as_int, SESSION_SECONDS)
        T = h.option("T", as_float, float(SESSION_SECONDS))
        n_paths = h.option("n_paths", as_int, 200)
        seed = h.option("seed", as_int, 0)
        c_lambda = h.option("c_lambda", as_float, DEFAULT_C_LAMBDA)
        if n_paths < 1:
            raise ConfigurationError(f"n-paths must be at least 1, got {n_paths}")

        rows: list[dict[str, object]] = []
        for model in models:
            params = model_params(model)
            for zeta in zetas:
                samples = await h.map(
                    compare_path, [(model, params, n, T, zeta, seed + i, c_lambda) for i in range(n_paths)],
                    label=f"{model} paths at zeta={zeta:g}"
                )
                clamped = sum(1 for s in samples if s.clamped)
                unconverged = sum(1 for s in samples if not s.converged)
                if clamped:
                    logger.warning(f"{model} at zeta={zeta:g}: plug-ins were floored on {clamped} of {n_paths} paths")
                if unconverged:
                    logger.warning(f"{model} at zeta={zeta:g}: selection did not converge on {unconverged} of {n_paths} paths")
                rows.extend(comparison_rows(model, zeta, samples))

        h.write_table("compare.csv", pd.DataFrame(rows), {"units": "variance per day, errors integrated over time in days"})


async def setup(harness: Harness) -> None:
    harness.add_command(CompareCommand(harness))
