import argparse
import logging
import pandas as pd

from typing_extensions import override

from spotvol.constants import SESSION_SECONDS
from spotvol.harness import Command, Harness
from spotvol.models.dynamics import ModelParams, model_params
from spotvol.models.results import CltResult, CltSpec, Regime
from spotvol.utils.config import as_bool, as_float, as_int, as_str
from spotvol.utils.metrics import check_clt_inputs, clt_statistic, summarize_clt

logger = logging.getLogger("SpotVol")

COVERAGE_BAND = (0.90, 0.98)

def clt_sample(
    model: str, params: ModelParams, spec: CltSpec, n: int, seed: int, zeta: float, feasible: bool, T_seconds: float
) -> float:
    return clt_statistic(model, params, spec, n, seed, zeta, feasible=feasible, T_seconds=T_seconds)

def summary_row(model: str, zeta: float, result: CltResult) -> dict[str, object]:
    return {
        "model": model, "regime": result.spec.regime.value, "c": result.spec.c, "a": result.spec.a,
        "tau": result.spec.tau, "t_eval": result.spec.t_eval, "zeta": zeta,
        "n": result.n, "N": result.N, "M": result.M, "paths": result.n_paths,
        "ks_stat": result.ks_stat, "ks_pvalue": result.ks_pvalue,
        "jb_stat": result.jb_stat, "jb_pvalue": result.jb_pvalue,
        "coverage_95": result.coverage_95, "mean_z": result.mean_z, "var_z": result.var_z,
        "feasible": result.feasible, "avar_scale": result.avar_scale,
    }

class CltCommand(Command):
    name = "clt"
    help = "Checks the normal limit of the spot estimator at one time by Monte Carlo."

    @override
    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--regime", choices=[r.value for r in Regime], help="cut-off regime, defaults to no-noise-subopt")
        parser.add_argument("--model", help="sv1f, heston or constant, defaults to sv1f")
        parser.add_argument("--c", type=float, help="convolution cut-off constant, defaults to 0.5")
        parser.add_argument("--a", type=float, help="inversion cut-off constant, defaults to 1")
        parser.add_argument("--tau", type=float, help="exponent of the suboptimal regimes in (1, 2), defaults to 1.5")
        parser.add_argument("--t-eval", type=float, help="evaluation time as a fraction of the session, defaults to 0.5")
        parser.add_argument("--n", type=int, help="number of increments per path, defaults to 23400")
        parser.add_argument("--T", type=float, help="session length in seconds, defaults to 23400")
        parser.add_argument("--zeta", type=float, help="noise-to-signal ratio, defaults to 0")
        parser.add_argument("--n-paths", type=int, help="number of paths, defaults to 1000")
        parser.add_argument("--seed", type=int, help="seed of the first path, path i uses seed + i")
        parser.add_argument("--feasible", action="store_true", default=None, help="standardize with estimated instead of true quantities")
        parser.add_argument("--avar-scale", type=float, help="multiplier of the asymptotic variance, 0.5 gives the negative control")

    @override
    async def run(self) -> None:
        h = self.harness
        model = h.option("model", as_str, "sv1f")
        params = model_params(model)
        spec = CltSpec(
            regime=Regime.parse(h.option("regime", as_str, Regime.NO_NOISE_SUBOPT.value)),
            c=h.option("c", as_float, 0.5),
            a=h.option("a", as_float, 1.0),
            t_eval=h.option("t_eval", as_float, 0.5),
            tau=h.option("tau", as_float, 1.5),
        )
        n = h.option("n", as_int, SESSION_SECONDS)
        T = h.option("T", as_float, float(SESSION_SECONDS))
        zeta = h.option("zeta", as_float, 0.0)
        n_paths = h.option("n_paths", as_int, 1000)
        seed = h.option("seed", as_int, 0)
        feasible = h.option("feasible", as_bool, False)
        avar_scale = h.option("avar_scale", as_float, 1.0)
        check_clt_inputs(spec, n, n_paths, zeta)

        cfg = spec.cutoffs(n)
        logger.info(f"Checking regime {spec.regime.value} with N={cfg.N}, M={cfg.M} on {n_paths} {model} paths")
        z = await h.map(clt_sample, [(model, params, spec, n, seed + i, zeta, feasible, T) for i in range(n_paths)])
        result = summarize_clt(spec, n, z, feasible=feasible, avar_scale=avar_scale)

        low, high = COVERAGE_BAND
        if not low <= result.coverage_95 <= high:
            logger.warning(f"Coverage of the 95% intervals is {result.coverage_95:.3f}, outside [{low:g}, {high:g}]")
        logger.info(f"KS distance {result.ks_stat:.4f}, JB p-value {result.jb_pvalue:.3f}, coverage {result.coverage_95:.3f}")

        h.write_table("clt.csv", pd.DataFrame([summary_row(model, zeta, result)]), {"coverage_band": f"[{low:g}, {high:g}]"})
        h.write_table("clt_z.csv", pd.DataFrame({"seed": [seed + i for i in range(n_paths)], "z": result.z}))
        h.manifest.details.update(coverage_95=result.coverage_95, ks_stat=result.ks_stat, jb_pvalue=result.jb_pvalue)


async def setup(harness: Harness) -> None:
    harness.add_command(CltCommand(harness))
