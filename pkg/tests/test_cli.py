import csv
import io
import json

import numpy as np
import pytest

from cp2willmore import cli
from cp2willmore.errors import ConfigError, ImmersionError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_json_schema(capsys):
    code, out, _ = run(capsys, "eval", "whitney", "t=1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"surface", "params", "grid", "seed", "invariants", "checks"}
    assert doc["surface"] == "whitney" and doc["params"] == {"t": 1.0}
    wm = doc["invariants"]["Wminus"]
    assert wm["value"] == pytest.approx(8 * np.pi, rel=1e-10)
    assert wm["expected"] == pytest.approx(8 * np.pi) and wm["citation"]
    assert doc["invariants"]["chi"]["snapped"] == 2
    assert all(c["status"] == "PASS" for c in doc["checks"])


def test_eval_complex_parameters(capsys):
    code, out, _ = run(capsys, "eval", "surface=phi_ab", "a=1", "b=2i", "--format", "json", "--grid", "32x64")
    assert code == 0
    doc = json.loads(out)
    assert doc["params"]["b"] == {"re": 0.0, "im": 2.0}
    assert doc["grid"] == [32, 64]


def test_eval_csv_and_text(capsys):
    code, out, _ = run(capsys, "eval", "clifford", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["name"] for r in rows} >= {"area", "Wminus", "chi"}
    assert not out.endswith("\n\n")
    code, out, _ = run(capsys, "eval", "line")
    assert code == 0 and out.startswith("surface complex_line")


def test_eval_to_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "eval", "line", "--format", "json", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["invariants"]["Wminus"]["value"] == pytest.approx(2 * np.pi)


@pytest.mark.parametrize(
    "argv",
    [
        ["eval"],
        ["eval", "nope"],
        ["eval", "whitney", "t=-1"],
        ["eval", "whitney", "grid=4x4"],
        ["eval", "whitney", "colour=red"],
        ["eval", "phi_ab", "a=0", "b=0"],
        ["eval", "line", "version=2"],
        ["eval", "line", "--format", "xml"],
        ["verify", "nosuch"],
        ["scan", "whitney"],
        ["scan", "flat_torus", "param=r1_sq", "values=0,1"],
        ["optimize", "whitney"],
        ["optimize", "start=1,0,0"],
        ["frobnicate"],
    ],
)
def test_config_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_numerical_failure_exit_3(capsys, monkeypatch):
    def boom(cfg):
        raise ImmersionError("rank drop")

    monkeypatch.setitem(cli.COMMANDS, "eval", boom)
    code, _, err = run(capsys, "eval", "line")
    assert code == 3 and "numerical failure" in err


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# whitney run\nversion = 1\nsurface = whitney\nt = 2\n\nformat = json\n")
    code, out, _ = run(capsys, "eval", "--config", str(cfg))
    assert code == 0 and json.loads(out)["params"] == {"t": 2.0}
    # command-line overrides win over the file
    code, out, _ = run(capsys, "eval", "--config", str(cfg), "t=0.5")
    assert json.loads(out)["params"] == {"t": 0.5}


def test_config_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("surface whitney\n")
    assert run(capsys, "eval", "--config", str(bad))[0] == 2
    assert run(capsys, "eval", "--config", str(tmp_path / "missing.cfg"))[0] == 2


def test_parsers():
    assert cli.parse_complex("1+2i") == 1 + 2j
    assert cli.parse_complex("2i") == 2j
    assert cli.parse_grid("16x32") == (16, 32)
    assert cli.parse_values("0.2:0.5:4", None) == pytest.approx([0.2, 0.3, 0.4, 0.5])
    assert cli.parse_values("0,1,2i", "b") == [0, 1, 2j]
    assert cli.parse_overrides(["whitney", "t=1"]) == {"surface": "whitney", "t": "1"}
    assert cli.parse_kv_text("a = 1 # note\n# c\n") == {"a": "1"}
    with pytest.raises(ConfigError):
        cli.parse_complex("one")
    with pytest.raises(ConfigError):
        cli.parse_grid("16")


def test_verify_single_surface(capsys):
    code, out, _ = run(capsys, "verify", "identities", "clifford", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["surfaces"] == ["clifford"]
    assert doc["checks"] and all(c["status"] == "PASS" for c in doc["checks"])


def test_verify_failure_exits_1(capsys, monkeypatch):
    from cp2willmore import suites

    def failing(ctx):
        return [suites.close("always:fails", "x", 1.0, 0.0, 0.1)]

    monkeypatch.setitem(suites.SUITE_FUNCS, "identities", failing)
    code, out, _ = run(capsys, "verify", "identities", "line")
    assert code == 1 and "FAIL" in out


def test_scan_phi_ab_constant(capsys):
    code, out, _ = run(capsys, "scan", "phi_ab", "param=b", "values=0,1,2i", "--format", "json")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert [r["status"] for r in rows] == ["ok"] * 3
    assert [r["Wminus"] for r in rows] == pytest.approx([4 * np.pi] * 3, rel=1e-10)


def test_scan_records_row_errors(capsys):
    code, out, _ = run(capsys, "scan", "whitney", "param=t", "values=1,-1", "--format", "json")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert rows[0]["status"] == "ok" and rows[1]["status"].startswith("error")


def test_scan_flat_torus_minimum(capsys):
    code, out, _ = run(capsys, "scan", "flat_torus", "param=r1_sq", "values=0.2:0.5:7", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    best = min(rows, key=lambda r: float(r["Wminus"]))
    assert float(best["r1_sq"]) == pytest.approx(0.35)


def test_optimize(capsys):
    code, out, _ = run(capsys, "optimize", "start=0.5,0.3,0.2", "--format", "json")
    assert code == 0
    best = json.loads(out)["best"]
    assert best["argmin_r_sq"] == pytest.approx([1 / 3] * 3, abs=1e-6)
    assert best["min_Wminus"] == pytest.approx(8 * np.pi**2 / (3 * np.sqrt(3)), rel=1e-10)


def test_optimize_not_converged(capsys):
    code, _, err = run(capsys, "optimize", "maxiter=5")
    assert code == 4 and "did not converge" in err
