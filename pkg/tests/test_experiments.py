import datetime
import math

import numpy as np
import pandas as pd
import pytest

from spotvol.commands.empirical import summary_table
from spotvol.models.dynamics import ConstantVolParams
from spotvol.models.results import CltSpec, Regime
from spotvol.models.ticks import SessionSpec
from spotvol.utils.config import business_days
from spotvol.utils.experiments import empirical_day, point_error, rmse, sweep_path, write_simulated_path
from spotvol.utils.file import read_header
from spotvol.utils.ingestion import load_path, load_ticks

CONSTANT = ConstantVolParams()

def test_write_simulated_path(tmp_path):
    info = write_simulated_path(str(tmp_path), 3, "constant", CONSTANT, 100, 100.0, 0.5, 4)
    assert info["files"] == ["path_0003_clean.csv", "path_0003_noisy.csv", "path_0003_true_var.csv"]
    assert info["xi"] > 0
    assert all((tmp_path / name).is_file() for name in info["files"])

    clean = load_path(tmp_path / "path_0003_clean.csv")
    noisy = load_path(tmp_path / "path_0003_noisy.csv")
    assert clean.n == noisy.n == 100
    assert not np.array_equal(clean.logprices, noisy.logprices)
    assert read_header(str(tmp_path / "path_0003_true_var.csv"))["units"] == "variance per day"

def test_write_simulated_path_fixed_return_std(tmp_path):
    info = write_simulated_path(str(tmp_path), 0, "constant", CONSTANT, 100, 100.0, 2.0, 4, return_std=1e-3)
    assert info["xi"] == pytest.approx(4e-6)

def test_write_simulated_session(tmp_path):
    info = write_simulated_path(str(tmp_path), 0, "constant", CONSTANT, 100, 100.0, 0.0, 4, "2024-01-02")
    assert info["files"] == ["2024-01-02.csv"]
    assert info["xi"] == 0.0
    ticks = load_ticks(tmp_path / "2024-01-02.csv")
    assert len(ticks) == 101
    assert ticks.timestamps[-1] == pytest.approx(100.0)

def test_sweep_path():
    errors = sweep_path("constant", CONSTANT, 2000, 2000.0, 0.0, 5, [(0.5, 1.0), (1.0, 1.0)])
    assert len(errors) == 2
    assert all(e.ise >= 0 and e.iae >= 0 for e in errors)
    assert errors == sweep_path("constant", CONSTANT, 2000, 2000.0, 0.0, 5, [(0.5, 1.0), (1.0, 1.0)])

def test_point_error_is_seeded():
    spec = CltSpec(Regime.NO_NOISE_OPT, c=0.5, a=1.0)
    first = point_error("constant", CONSTANT, spec, 4096, 11)
    assert math.isfinite(first)
    assert first == point_error("constant", CONSTANT, spec, 4096, 11)
    assert first != point_error("constant", CONSTANT, spec, 4096, 12)

def test_rmse():
    assert rmse([3.0, -4.0]) == pytest.approx(math.sqrt(12.5))
    assert rmse([0.0]) == 0.0

def test_empirical_day_on_simulated_session(tmp_path):
    write_simulated_path(str(tmp_path), 0, "constant", CONSTANT, 23400, 23400.0, 0.0, 8, "2024-01-02")
    row = empirical_day("2024-01-02", str(tmp_path / "2024-01-02.csv"), SessionSpec(), 300.0, 500.0)
    assert row["skipped"] == ""
    assert row["n"] == 23400
    assert row["returns"] == 78
    assert 0.5 < row["variance"] < 1.5
    assert 0.0 <= row["jb_pvalue"] <= 1.0

def test_simulated_market_has_normal_standardized_returns(tmp_path):
    rows = []
    for i, day in enumerate(business_days(datetime.date(2024, 1, 2), 41)):
        name = day.isoformat()
        write_simulated_path(str(tmp_path), i, "constant", CONSTANT, 23400, 23400.0, 0.0, 100 + i, name)
        rows.append(empirical_day(name, str(tmp_path / f"{name}.csv"), SessionSpec(), 300.0, 500.0))

    summary = summary_table(pd.DataFrame(rows)).set_index("statistic")
    assert summary.loc["mean", "days"] == 41
    assert summary.loc["mean", "average"] == pytest.approx(0.0, abs=0.05)
    assert summary.loc["variance", "average"] == pytest.approx(1.0, abs=0.1)
    assert summary.loc["kurtosis", "average"] == pytest.approx(3.0, abs=0.3)
    assert summary.loc["jb_rejection_rate", "average"] <= 0.1

def test_summary_without_tested_days():
    days = pd.DataFrame([
        {"date": "2024-01-02", "n": 23400, "N": 300, "M": 6, "converged": True, "skipped": "negative estimate"},
    ])
    summary = summary_table(days).set_index("statistic")
    assert summary["days"].eq(0).all()
    assert summary["average"].isna().all()
    assert summary["std"].isna().all()
