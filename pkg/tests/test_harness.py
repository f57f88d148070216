import asyncio

import pandas as pd
import pytest

from spotvol.harness import Harness
from spotvol.models.exceptions import ConfigurationError, ImaginaryResidue, InvalidParameter
from spotvol.models.manifest import RunManifest
from spotvol.services.error_handler import MAX_REASON_LENGTH, ErrorHandlingService, error_line
from spotvol.utils.config import as_float, as_int, as_str

def square_sum(a: int, b: int) -> int:
    return a * a + b

def test_option_resolution():
    harness = Harness()
    harness.configure({"n": "10", "N": 5, "zeta": "", "n-paths": "4", "out": "ignored", "jobs": 3}, jobs=2)
    assert harness.jobs == 2
    assert harness.option("n", as_int) == 10
    assert harness.option("N", as_int) == 5
    assert harness.option("zeta", as_float, 0.0) == 0.0
    assert harness.option("n_paths", as_int, 1) == 4
    assert harness.option("model", as_str, "sv1f") == "sv1f"
    assert harness.resolved == {"n": 10, "N": 5, "zeta": 0.0, "n_paths": 4, "model": "sv1f"}
    assert "jobs" not in harness.config

    with pytest.raises(ConfigurationError) as e:
        harness.option("input", as_str, required=True)
    assert "--input" in str(e.value)
    with pytest.raises(ConfigurationError):
        harness.configure({}, jobs=0)

def test_unused_options():
    harness = Harness()
    harness.configure({"n": "10", "seed": "2", "out": "somewhere"})
    harness.option("n", as_int)
    assert harness.unused_options() == ["seed"]

def test_bad_option_value():
    harness = Harness()
    harness.configure({"n_paths": "many"})
    with pytest.raises(ConfigurationError):
        harness.option("n_paths", as_int, 1)

def test_map_inline_keeps_order():
    harness = Harness()
    results = asyncio.run(harness.map(square_sum, [(3, 1), (1, 0), (2, 2)]))
    assert results == [10, 1, 6]
    assert asyncio.run(harness.map(square_sum, [])) == []

def test_write_table_records_digest(tmp_path):
    harness = Harness()
    harness.configure({"out": str(tmp_path)})

    async def command():
        harness.option("seed", as_int, 7)
        harness.write_table("table.csv", pd.DataFrame({"x": [1, 2]}), {"units": "none"})

    harness.commands["table"] = type("TableCommand", (), {"run": staticmethod(command)})()
    manifest = asyncio.run(harness.run("table"))
    assert manifest.seed == 7
    assert list(manifest.files) == ["table.csv"]
    text = (tmp_path / "table.csv").read_text()
    assert text.startswith("# command: table\n")
    assert "# seed: 7\n" in text
    assert "# units: none\n" in text
    assert (tmp_path / "manifest.json").is_file()

    with pytest.raises(ConfigurationError):
        asyncio.run(harness.run("missing"))

def test_error_line():
    assert error_line("validation", 2, "bad\n  value") == "spotvol: error=validation code=2 reason=bad value"
    long = error_line("internal", 1, "x" * 2000)
    assert len(long) < 2000
    assert long.endswith("...")
    assert MAX_REASON_LENGTH < 2000

def test_error_handler_codes(capsys):
    harness = Harness()
    handler = ErrorHandlingService(harness)

    assert handler.handle(InvalidParameter("M", 0, "must be positive")) == 2
    assert capsys.readouterr().err.strip() == "spotvol: error=validation code=2 reason=M=0 is invalid, must be positive"

    assert handler.handle(ImaginaryResidue(1e-3, 1.0)) == 3
    assert "error=numerical code=3" in capsys.readouterr().err

    assert handler.handle(FloatingPointError("overflow encountered")) == 3
    assert "FloatingPointError" in capsys.readouterr().err

    assert handler.handle(KeyboardInterrupt()) == 1
    assert "error=interrupted" in capsys.readouterr().err

    assert handler.handle(RuntimeError("boom")) == 1
    err = capsys.readouterr().err
    assert "error=internal code=1" in err
    assert "--debug" in err

def test_manifest_verify(tmp_path):
    (tmp_path / "a.csv").write_text("x\n1\n")
    (tmp_path / "b.csv").write_text("x\n2\n")
    manifest = RunManifest(command="simulate", config={"seed": 1}, seed=1, version="1.0.0")
    manifest.record(str(tmp_path), "a.csv")
    manifest.record(str(tmp_path), "b.csv")
    path = manifest.write(str(tmp_path))

    loaded = RunManifest.from_file(path)
    assert loaded == manifest
    assert loaded.verify(str(tmp_path)) == []

    (tmp_path / "b.csv").write_text("x\n3\n")
    (tmp_path / "a.csv").unlink()
    assert sorted(loaded.verify(str(tmp_path))) == ["a.csv", "b.csv"]

    broken = tmp_path / "broken.json"
    broken.write_text('{"command": "simulate"}')
    with pytest.raises(ConfigurationError):
        RunManifest.from_file(str(broken))
