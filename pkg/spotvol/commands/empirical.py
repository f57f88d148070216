import argparse
import logging
import pandas as pd

from typing_extensions import override

from spotvol.constants import DEFAULT_C_LAMBDA, DEFAULT_RETURN_HORIZON
from spotvol.harness import Command, Harness
from spotvol.utils.config import as_float, as_str
from spotvol.utils.converters import add_session_arguments, session_option
from spotvol.utils.experiments import empirical_day
from spotvol.utils.ingestion import load_exclusions, session_files

logger = logging.getLogger("SpotVol")

SUMMARY_COLUMNS = ("mean", "variance", "skewness", "kurtosis", "jb_stat", "jb_pvalue", "N", "M")
JB_LEVEL = 0.05

def summary_table(days: pd.DataFrame) -> pd.DataFrame:
    """Returns the average and standard deviation across days of each statistic, and the JB rejection rate."""
    days = days.reindex(columns=list(dict.fromkeys([*days.columns, "skipped", *SUMMARY_COLUMNS])))
    tested = days[days["skipped"] == ""]
    rows: list[dict[str, object]] = []
    for column in SUMMARY_COLUMNS:
        values = tested[column].astype(float)
        rows.append({
            "statistic": column, "average": values.mean(),
            "std": values.std(ddof=1) if len(values) > 1 else (0.0 if len(values) else float("nan")),
            "days": len(values),
        })
    rejected = (tested["jb_pvalue"].astype(float) < JB_LEVEL).mean() if len(tested) else float("nan")
    rows.append({"statistic": "jb_rejection_rate", "average": rejected, "std": float("nan"), "days": len(tested)})
    return pd.DataFrame(rows)

class EmpiricalCommand(Command):
    name = "empirical"
    help = "Tests the standardized returns of every trading day in a directory for normality."

    @override
    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--data-dir", help="directory of YYYY-MM-DD.csv tick files")
        parser.add_argument("--exclusions", help="file listing ISO dates to leave out, one per line")
        parser.add_argument("--horizon", type=float, help=f"return horizon h in seconds, defaults to {DEFAULT_RETURN_HORIZON:g}")
        parser.add_argument("--c-lambda", type=float, help=f"learning rate constant of the selector, defaults to {DEFAULT_C_LAMBDA:g}")
        add_session_arguments(parser)

    @override
    async def run(self) -> None:
        h = self.harness
        data_dir = h.option("data_dir", as_str, None, required=True)
        exclusions = load_exclusions(h.option("exclusions", as_str, None) or None)
        horizon = h.option("horizon", as_float, DEFAULT_RETURN_HORIZON)
        c_lambda = h.option("c_lambda", as_float, DEFAULT_C_LAMBDA)
        session = session_option(h)

        files = session_files(data_dir, exclusions)
        logger.info(f"Found {len(files)} trading day(s) in {data_dir}")
        rows = await h.map(
            empirical_day,
            [(day.isoformat(), source, session, horizon, c_lambda) for day, source in files],
            label="days"
        )
        days = pd.DataFrame(rows)
        skipped = days[days["skipped"] != ""]
        if len(skipped):
            logger.warning(f"Skipped {len(skipped)} day(s) with nonpositive spot estimates: {', '.join(skipped['date'])}")
        clamped = days[days["clamped"] != ""]
        if len(clamped):
            logger.warning(f"Plug-ins were floored on {len(clamped)} of {len(days)} day(s): {', '.join(clamped['date'])}")
        if len(skipped) == len(days):
            logger.warning("No trading day could be tested, the summary holds no statistics")

        h.write_table("empirical_days.csv", days, {"units": "standardized returns, N and M as frequencies"})
        h.write_table("empirical_summary.csv", summary_table(days), {"jb_level": JB_LEVEL})
        h.manifest.details["days"] = [day.isoformat() for day, _ in files]


async def setup(harness: Harness) -> None:
    harness.add_command(EmpiricalCommand(harness))
