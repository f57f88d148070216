import argparse
import logging
import pandas as pd

from typing_extensions import override

from spotvol.constants import SESSION_SECONDS
from spotvol.harness import Command, Harness
from spotvol.models.configs import EstimatorConfig
from spotvol.models.dynamics import model_params
from spotvol.models.exceptions import ConfigurationError
from spotvol.utils.config import as_float, as_int, as_range, as_str, list_of
from spotvol.utils.experiments import sweep_path
from spotvol.utils.metrics import summarize_errors

logger = logging.getLogger("SpotVol")

class BenchmarkCommand(Command):
    name = "benchmark"
    help = "Sweeps the cut-off constants (c, a) and tabulates the MISE and MIAE of the Fourier estimator."

    @override
    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--models", help="comma separated models, defaults to sv1f,heston")
        parser.add_argument("--zetas", help="comma separated noise-to-signal ratios, defaults to 1,2,3")
        parser.add_argument("--c-range", help="values of c as start:stop:step or a list, defaults to 1:10:1")
        parser.add_argument("--a-range", help="values of a as start:stop:step or a list, defaults to 0.1:0.5:0.1")
        parser.add_argument("--n", type=int, help="number of increments per path, defaults to 23400")
        parser.add_argument("--T", type=float, help="session length in seconds, defaults to 23400")
        parser.add_argument("--n-paths", type=int, help="paths per (model, zeta), defaults to 200")
        parser.add_argument("--seed", type=int, help="seed of the first path, path i uses seed + i")

    @override
    async def run(self) -> None:
        h = self.harness
        models = h.option("models", list_of(as_str), ["sv1f", "heston"])
        zetas = h.option("zetas", list_of(as_float), [1.0, 2.0, 3.0])
        c_values = h.option("c_range", as_range, as_range("1:10:1"))
        a_values = h.option("a_range", as_range, as_range("0.1:0.5:0.1"))
        n = h.option("n", as_int, SESSION_SECONDS)
        T = h.option("T", as_float, float(SESSION_SECONDS))
        n_paths = h.option("n_paths", as_int, 200)
        seed = h.option("seed", as_int, 0)
        if n_paths < 1:
            raise ConfigurationError(f"n-paths must be at least 1, got {n_paths}")

        cells = [(c, a) for c in c_values for a in a_values]
        configs = [EstimatorConfig.from_constants(c, a, n) for c, a in cells]
        for cfg in configs:
            cfg.validate_for(n)
        logger.info(f"Benchmarking {len(cells)} cells on {len(models)} model(s) and {len(zetas)} noise level(s)")

        rows: list[dict[str, object]] = []
        for model in models:
            params = model_params(model)
            for zeta in zetas:
                # Paths share seeds across cells and noise levels
                errors = await h.map(
                    sweep_path, [(model, params, n, T, zeta, seed + i, cells) for i in range(n_paths)],
                    label=f"{model} paths at zeta={zeta:g}"
                )
                for idx, ((c, a), cfg) in enumerate(zip(cells, configs)):
                    summary = summarize_errors([path_errors[idx] for path_errors in errors])
                    rows.append({
                        "model": model, "zeta": zeta, "c": c, "a": a, "N": cfg.N, "M": cfg.M,
                        "mise": summary.mise, "miae": summary.miae,
                        "mise_se": summary.mise_se, "miae_se": summary.miae_se, "paths": summary.paths,
                    })

        table = pd.DataFrame(rows)
        h.write_table("benchmark.csv", table, {"units": "variance per day, errors integrated over time in days"})
        h.write_table("benchmark_optimum.csv", optimum_table(table))

def optimum_table(table: pd.DataFrame) -> pd.DataFrame:
    """Returns the MISE and MIAE minimizing cells of every (model, zeta)."""
    rows: list[dict[str, object]] = []
    for (model, zeta), group in table.groupby(["model", "zeta"], sort=False):
        best_mise = group.loc[group["mise"].idxmin()]
        best_miae = group.loc[group["miae"].idxmin()]
        rows.append({
            "model": model, "zeta": zeta,
            "mise_c": best_mise["c"], "mise_a": best_mise["a"], "mise": best_mise["mise"],
            "miae_c": best_miae["c"], "miae_a": best_miae["a"], "miae": best_miae["miae"],
        })
    return pd.DataFrame(rows)


async def setup(harness: Harness) -> None:
    harness.add_command(BenchmarkCommand(harness))
