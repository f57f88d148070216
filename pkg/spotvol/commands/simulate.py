import argparse
import dataclasses
import logging

from dateutil.parser import isoparse
from typing_extensions import override

from spotvol.constants import SESSION_SECONDS
from spotvol.harness import Command, Harness
from spotvol.models.dynamics import MODEL_PARAMS
from spotvol.models.exceptions import ConfigurationError
from spotvol.utils.config import as_float, as_int, as_str, business_days, load_model_params
from spotvol.utils.experiments import write_simulated_path

logger = logging.getLogger("SpotVol")

LAYOUTS = ("paths", "sessions")
DEFAULT_START_DATE = "2024-01-02"

class SimulateCommand(Command):
    name = "simulate"
    help = "Simulates price paths with their true spot variance."

    @override
    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--model", choices=sorted(MODEL_PARAMS), help="volatility model, defaults to sv1f")
        parser.add_argument("--params-file", help="key = value file overriding model parameters")
        parser.add_argument("--n", type=int, help="number of increments per path, defaults to 23400")
        parser.add_argument("--T", type=float, help="session length in seconds, defaults to 23400")
        parser.add_argument("--zeta", type=float, help="noise-to-signal ratio, defaults to 0")
        parser.add_argument("--return-std", type=float, help="std of clean returns used for the noise variance of every path, defaults to each path's own")
        parser.add_argument("--n-paths", type=int, help="number of paths, defaults to 1")
        parser.add_argument("--seed", type=int, help="seed of the first path, path i uses seed + i")
        parser.add_argument("--layout", choices=LAYOUTS, help="paths writes three files per path, sessions one tick file per day")
        parser.add_argument("--start-date", help=f"first trading day of the sessions layout, defaults to {DEFAULT_START_DATE}")

    @override
    async def run(self) -> None:
        h = self.harness
        model = h.option("model", as_str, "sv1f")
        params = load_model_params(model, h.option("params_file", as_str, None))
        n = h.option("n", as_int, SESSION_SECONDS)
        T = h.option("T", as_float, float(SESSION_SECONDS))
        zeta = h.option("zeta", as_float, 0.0)
        return_std = h.option("return_std", as_float, None)
        n_paths = h.option("n_paths", as_int, 1)
        seed = h.option("seed", as_int, 0)
        layout = h.option("layout", as_str, "paths")
        if layout not in LAYOUTS:
            raise ConfigurationError(f"unknown layout {layout!r}, expected one of {', '.join(LAYOUTS)}")
        if n_paths < 1:
            raise ConfigurationError(f"n-paths must be at least 1, got {n_paths}")

        dates: list[str | None] = [None] * n_paths
        if layout == "sessions":
            start = h.option("start_date", as_str, DEFAULT_START_DATE)
            try:
                first = isoparse(start).date()
            except ValueError:
                raise ConfigurationError(f"start-date {start!r} is not an ISO date")
            dates = [day.isoformat() for day in business_days(first, n_paths)]

        out = h.output_dir
        results = await h.map(
            write_simulated_path,
            [(out, i, model, params, n, T, zeta, seed + i, dates[i], return_std) for i in range(n_paths)]
        )
        for result in results:
            for name in result["files"]:
                h.record_file(name)

        truncated = [r for r in results if r["truncated_share"] > 0]
        if truncated:
            worst = max(r["truncated_share"] for r in truncated)
            logger.warning(f"{len(truncated)} of {n_paths} paths truncated a negative variance, at most on {worst:.2e} of their steps")

        h.manifest.details["params"] = dataclasses.asdict(params)
        h.manifest.details["paths"] = [
            {"index": r["index"], "seed": r["seed"], "xi": r["xi"], "truncated_share": r["truncated_share"]}
            for r in results
        ]


async def setup(harness: Harness) -> None:
    harness.add_command(SimulateCommand(harness))
