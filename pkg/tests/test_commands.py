import asyncio
import json

import pandas as pd
import pytest

from spotvol.constants import MANIFEST_FILE_NAME
from spotvol.main import main

def run(*args: str) -> int:
    return asyncio.run(main(list(args)))

def read_manifest(directory) -> dict:
    with open(directory / MANIFEST_FILE_NAME, encoding="utf-8") as f:
        return json.load(f)

def read_output(directory, name: str) -> pd.DataFrame:
    return pd.read_csv(directory / name, comment="#")

SIMULATE = ("simulate", "--model", "constant", "--n", "2340", "--T", "2340", "--zeta", "0.5", "--n-paths", "2", "--seed", "3")

def test_simulate_writes_paths_and_manifest(tmp_path):
    assert run(*SIMULATE, "--out", str(tmp_path), "--jobs", "1") == 0

    manifest = read_manifest(tmp_path)
    assert manifest["command"] == "simulate"
    assert manifest["seed"] == 3
    assert manifest["config"]["model"] == "constant"
    assert "out" not in manifest["config"]
    assert sorted(manifest["files"]) == [
        f"path_000{i}_{kind}.csv" for i in range(2) for kind in ("clean", "noisy", "true_var")
    ]
    assert [p["seed"] for p in manifest["details"]["paths"]] == [3, 4]
    assert all(p["xi"] > 0 for p in manifest["details"]["paths"])

def test_simulate_is_reproducible(tmp_path):
    first, second, parallel, replay = (tmp_path / name for name in ("first", "second", "parallel", "replay"))
    assert run(*SIMULATE, "--out", str(first)) == 0
    assert run(*SIMULATE, "--out", str(second)) == 0
    assert run(*SIMULATE, "--out", str(parallel), "--jobs", "2") == 0
    assert run("simulate", "--config", str(first / MANIFEST_FILE_NAME), "--out", str(replay)) == 0

    digests = read_manifest(first)["files"]
    assert read_manifest(second)["files"] == digests
    assert read_manifest(parallel)["files"] == digests
    assert read_manifest(replay)["files"] == digests

def test_simulate_sessions_layout(tmp_path):
    assert run(
        "simulate", "--model", "constant", "--n", "100", "--T", "100", "--n-paths", "3",
        "--layout", "sessions", "--start-date", "2024-01-05", "--out", str(tmp_path)
    ) == 0
    assert sorted(read_manifest(tmp_path)["files"]) == ["2024-01-05.csv", "2024-01-08.csv", "2024-01-09.csv"]

def test_estimate_fourier_and_fejer(tmp_path):
    data = tmp_path / "data"
    assert run(*SIMULATE, "--out", str(data)) == 0
    source = str(data / "path_0000_noisy.csv")

    fourier = tmp_path / "fourier"
    assert run("estimate", "--input", source, "--N", "20", "--M", "4", "--grid", "500,1000,1500", "--out", str(fourier)) == 0
    table = read_output(fourier, "spot_variance.csv")
    assert list(table.columns) == ["time", "variance"]
    assert table["time"].tolist() == [500.0, 1000.0, 1500.0]
    details = read_manifest(fourier)["details"]
    assert (details["N"], details["M"], details["selected"]) == (20, 4, "explicit")

    fejer = tmp_path / "fejer"
    assert run("estimate", "--input", source, "--method", "fejer-kernel", "--M", "10", "--truncate", "--out", str(fejer)) == 0
    assert (read_output(fejer, "spot_variance.csv")["variance"] >= 0).all()

def test_estimate_rejects_missing_cutoffs(tmp_path, capsys):
    data = tmp_path / "data"
    assert run(*SIMULATE, "--out", str(data)) == 0
    capsys.readouterr()

    code = run("estimate", "--input", str(data / "path_0000_noisy.csv"), "--out", str(tmp_path / "out"))
    assert code == 2
    assert "spotvol: error=validation code=2" in capsys.readouterr().err

    assert run("estimate", "--out", str(tmp_path / "out")) == 2
    assert run("estimate", "--input", str(tmp_path / "missing.csv"), "--N", "5", "--M", "2", "--out", str(tmp_path / "out")) != 0

def test_select_and_adaptive_estimate(tmp_path):
    data = tmp_path / "data"
    assert run("simulate", "--model", "constant", "--zeta", "1", "--seed", "9", "--out", str(data)) == 0
    source = str(data / "path_0000_noisy.csv")

    selection = tmp_path / "select"
    assert run("select", "--input", source, "--out", str(selection)) == 0
    summary = read_output(selection, "selection.csv")
    assert len(summary) == 1
    assert (selection / "selector_trace.csv").is_file()
    details = read_manifest(selection)["details"]
    assert 76 <= details["N"] <= 1529
    assert 1 <= details["M"] <= 24

    adaptive = tmp_path / "adaptive"
    assert run("estimate", "--input", source, "--adaptive", "--out", str(adaptive)) == 0
    assert read_manifest(adaptive)["details"]["N"] == details["N"]

def test_floored_plugins_are_reported(tmp_path, caplog):
    data = tmp_path / "data"
    assert run("simulate", "--model", "constant", "--zeta", "1", "--seed", "9", "--out", str(data)) == 0
    source = str(data / "path_0000_noisy.csv")

    with caplog.at_level("WARNING", logger="SpotVol"):
        assert run("select", "--input", source, "--ivv", "0", "--out", str(tmp_path / "select")) == 0
    floored = [r for r in caplog.records if "were floored" in r.getMessage()]
    assert floored and floored[0].levelname == "WARNING"
    assert "ivv" in floored[0].getMessage()

def test_benchmark(tmp_path):
    assert run(
        "benchmark", "--models", "constant", "--zetas", "0,1", "--c-range", "1:2:1", "--a-range", "0.5",
        "--n", "2340", "--T", "2340", "--n-paths", "2", "--out", str(tmp_path)
    ) == 0
    table = read_output(tmp_path, "benchmark.csv")
    assert len(table) == 4
    assert (table["mise"] >= 0).all()
    optimum = read_output(tmp_path, "benchmark_optimum.csv")
    assert set(optimum["zeta"]) == {0.0, 1.0}

def test_compare(tmp_path):
    assert run("compare", "--models", "constant", "--zetas", "1", "--n-paths", "1", "--out", str(tmp_path)) == 0
    table = read_output(tmp_path, "compare.csv")
    assert sorted(table["estimator"]) == ["fourier", "preavg", "two-scale"]

def test_empirical(tmp_path):
    data = tmp_path / "data"
    assert run(
        "simulate", "--model", "constant", "--n-paths", "3", "--layout", "sessions",
        "--start-date", "2024-01-02", "--out", str(data)
    ) == 0
    exclusions = tmp_path / "exclusions.txt"
    exclusions.write_text("2024-01-03\n")

    out = tmp_path / "out"
    assert run("empirical", "--data-dir", str(data), "--exclusions", str(exclusions), "--out", str(out)) == 0
    assert read_manifest(out)["details"]["days"] == ["2024-01-02", "2024-01-04"]
    days = read_output(out, "empirical_days.csv")
    assert len(days) == 2
    assert "clamped" in days.columns
    assert (out / "empirical_summary.csv").is_file()

def test_clt_rate_and_kernel_check(tmp_path):
    clt = tmp_path / "clt"
    assert run("clt", "--model", "constant", "--n", "2000", "--n-paths", "10", "--out", str(clt)) == 0
    assert len(read_output(clt, "clt_z.csv")) == 10
    assert 0.0 <= read_manifest(clt)["details"]["coverage_95"] <= 1.0

    rate = tmp_path / "rate"
    assert run("rate", "--exponents", "8:10:1", "--n-paths", "4", "--out", str(rate)) == 0
    assert read_output(rate, "rate.csv")["n"].tolist() == [256, 512, 1024]
    assert read_output(rate, "rate_summary.csv")["expected_slope"].iloc[0] == pytest.approx(-0.25)

    kernels = tmp_path / "kernels"
    assert run("kernel-check", "--orders", "16,32,64", "--out", str(kernels)) == 0
    assert "passed" in read_manifest(kernels)["details"]
    assert len(read_output(kernels, "kernel_check.csv")) % 3 == 0

def test_validation_exit_codes(tmp_path, capsys):
    out = str(tmp_path)
    assert run("simulate", "--n-paths", "0", "--out", out) == 2
    assert run("simulate", "--jobs", "0", "--out", out) == 2
    assert run("clt", "--n-paths", "3", "--out", out) == 2
    assert run("rate", "--exponents", "8", "--out", out) == 2
    assert run("simulate", "--model", "constant", "--params-file", str(tmp_path / "missing.conf"), "--out", out) == 2
    lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith("spotvol:")]
    assert len(lines) == 5
    assert all("error=validation code=2" in line for line in lines)

def test_unknown_command_exits_through_argparse():
    with pytest.raises(SystemExit) as e:
        run("calibrate")
    assert e.value.code == 2
