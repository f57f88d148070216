import argparse
import logging
import pandas as pd

from typing_extensions import override

from spotvol.harness import Command, Harness
from spotvol.models.exceptions import InvalidParameter
from spotvol.models.results import LemmaReport, LemmaRow
from spotvol.utils.config import as_float, as_int, list_of
from spotvol.utils.lemmas import DEFAULT_ORDERS, DEFAULT_TOLERANCE_SCALE, check_orders, evaluate_named, lemmas

logger = logging.getLogger("SpotVol")

def order_rows(row: LemmaRow) -> list[dict[str, object]]:
    return [
        {
            "lemma": row.name, "order": order, "observed": observed, "target": row.target,
            "error": error, "tolerance": tolerance, "absolute": row.absolute,
        }
        for order, observed, error, tolerance in zip(row.orders, row.observed, row.errors, row.tolerances)
    ]

def summary_rows(report: LemmaReport) -> list[dict[str, object]]:
    return [
        {
            "lemma": row.name, "target": row.target, "final_order": row.orders[-1],
            "final_error": row.final_error, "tolerance": row.tolerances[-1],
            "convergence_order": row.slope, "passed": row.passed,
        }
        for row in report.rows
    ]

class KernelCheckCommand(Command):
    name = "kernel-check"
    help = "Evaluates the limit identities of the Dirichlet and Fejér kernels at increasing orders."

    @override
    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        orders = ",".join(str(order) for order in DEFAULT_ORDERS)
        parser.add_argument("--orders", help=f"comma separated kernel orders, defaults to {orders}")
        parser.add_argument("--scale", type=float, help=f"tolerance is scale / order, defaults to {DEFAULT_TOLERANCE_SCALE:g}")

    @override
    async def run(self) -> None:
        h = self.harness
        orders = check_orders(h.option("orders", list_of(as_int), list(DEFAULT_ORDERS)))
        scale = h.option("scale", as_float, DEFAULT_TOLERANCE_SCALE)
        if not scale > 0:
            raise InvalidParameter("scale", scale, "must be positive")

        names = [lemma.name for lemma in lemmas()]
        report = LemmaReport(tuple(await h.map(evaluate_named, [(name, orders, scale) for name in names], label="identities")))
        failures = report.failures()
        if failures:
            logger.warning(f"{len(failures)} of {len(names)} kernel identities failed: {', '.join(r.name for r in failures)}")
        else:
            logger.info(f"All {len(names)} kernel identities passed at order {orders[-1]}")

        h.write_table("kernel_check.csv", pd.DataFrame([r for row in report.rows for r in order_rows(row)]))
        h.write_table("kernel_check_summary.csv", pd.DataFrame(summary_rows(report)), {"passed": report.passed})
        h.manifest.details.update(passed=report.passed, failures=[row.name for row in failures])


async def setup(harness: Harness) -> None:
    harness.add_command(KernelCheckCommand(harness))
