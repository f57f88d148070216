import argparse
import logging
import pandas as pd

from typing_extensions import override

from spotvol.constants import SESSION_SECONDS
from spotvol.harness import Command, Harness
from spotvol.models.dynamics import model_params
from spotvol.models.exceptions import ConfigurationError
from spotvol.models.results import CltSpec, Regime
from spotvol.utils.config import as_float, as_int, as_range, as_str
from spotvol.utils.experiments import point_error, rmse
from spotvol.utils.metrics import log_log_slope

logger = logging.getLogger("SpotVol")

SLOPE_TOLERANCE = 0.05

def expected_slope(spec: CltSpec) -> float:
    """Returns the log-log slope of the RMSE against n implied by the regime's rate.

    The error shrinks like M^(1/2) / n^(1/2) without noise and like
    M^(1/2) / n^(1/4) with noise, where M grows like n^(1/2) (resp. n^(1/4))
    in the optimal regimes and n^(1/tau) (resp. n^(1/(2 tau))) otherwise."""
    growth = 0.5 if spec.regime.optimal else 1 / spec.tau
    if spec.regime.noisy:
        return growth / 4 - 0.25
    return growth / 2 - 0.5

class RateCommand(Command):
    name = "rate"
    help = "Fits the log-log slope of the spot estimator's RMSE against the number of increments."

    @override
    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--regime", choices=[r.value for r in Regime], help="cut-off regime, defaults to no-noise-opt")
        parser.add_argument("--exponents", help="base 2 exponents of n as start:stop:step or a list, defaults to 10:15:1")
        parser.add_argument("--model", help="sv1f, heston or constant, defaults to constant")
        parser.add_argument("--c", type=float, help="convolution cut-off constant, defaults to 0.5")
        parser.add_argument("--a", type=float, help="inversion cut-off constant, defaults to 1")
        parser.add_argument("--tau", type=float, help="exponent of the suboptimal regimes in (1, 2), defaults to 1.5")
        parser.add_argument("--t-eval", type=float, help="evaluation time as a fraction of the session, defaults to 0.5")
        parser.add_argument("--T", type=float, help="session length in seconds, defaults to 23400")
        parser.add_argument("--zeta", type=float, help="noise-to-signal ratio, defaults to 1 in the noise regimes and 0 otherwise")
        parser.add_argument("--n-paths", type=int, help="paths per n, defaults to 500")
        parser.add_argument("--seed", type=int, help="seed of the first path, path i uses seed + i")

    @override
    async def run(self) -> None:
        h = self.harness
        model = h.option("model", as_str, "constant")
        params = model_params(model)
        spec = CltSpec(
            regime=Regime.parse(h.option("regime", as_str, Regime.NO_NOISE_OPT.value)),
            c=h.option("c", as_float, 0.5),
            a=h.option("a", as_float, 1.0),
            t_eval=h.option("t_eval", as_float, 0.5),
            tau=h.option("tau", as_float, 1.5),
        )
        exponents = [int(e) for e in h.option("exponents", as_range, as_range("10:15:1"))]
        T = h.option("T", as_float, float(SESSION_SECONDS))
        zeta = h.option("zeta", as_float, 1.0 if spec.regime.noisy else 0.0)
        n_paths = h.option("n_paths", as_int, 500)
        seed = h.option("seed", as_int, 0)
        if n_paths < 2:
            raise ConfigurationError(f"n-paths must be at least 2, got {n_paths}")
        if len(set(exponents)) < 2:
            raise ConfigurationError("exponents need at least two distinct values for a slope")

        sizes = [2 ** e for e in exponents]
        for n in sizes:
            spec.cutoffs(n).validate_for(n)

        rows: list[dict[str, object]] = []
        for n in sizes:
            cfg = spec.cutoffs(n)
            errors = await h.map(
                point_error, [(model, params, spec, n, seed + i, zeta, T) for i in range(n_paths)],
                label=f"paths at n={n}"
            )
            rows.append({"n": n, "N": cfg.N, "M": cfg.M, "rmse": rmse(errors), "paths": n_paths})

        table = pd.DataFrame(rows)
        slope = log_log_slope(table["n"], table["rmse"])
        expected = expected_slope(spec)
        passed = abs(slope - expected) <= SLOPE_TOLERANCE
        if not passed:
            logger.warning(f"Fitted slope {slope:.4f} is more than {SLOPE_TOLERANCE:g} from {expected:.4f}")
        logger.info(f"RMSE slope {slope:.4f}, expected {expected:.4f}")

        h.write_table("rate.csv", table, {"regime": spec.regime.value, "units": "variance per day"})
        h.write_table("rate_summary.csv", pd.DataFrame([{
            "regime": spec.regime.value, "model": model, "zeta": zeta,
            "slope": slope, "expected_slope": expected, "tolerance": SLOPE_TOLERANCE, "passed": passed,
        }]))
        h.manifest.details.update(slope=slope, expected_slope=expected, passed=passed)


async def setup(harness: Harness) -> None:
    harness.add_command(RateCommand(harness))
