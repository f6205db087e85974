import csv
import io
import json
import shutil
import subprocess

import pytest

from starwalk.cli import run


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_scatter_walsh(capsys):
    code, out, _ = _run(capsys, "scatter", "--n", "3", "--b", "1,0,0", "--a", "0", "--c", "0")
    assert code == 0
    assert "S = [[1,0,0],[2,-1,0],[2,0,-1]]" in out
    assert "det = 1" in out


def test_scatter_sticky_json(capsys, tmp_path):
    out_path = tmp_path / "s.json"
    code, _, _ = _run(capsys, "scatter", "--b", "0.25,0.25", "--c", "0.5", "--a", "0",
                      "--run.k", "1.5", "--format", "json", "--output", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["regime"] == "sticky"
    assert doc["bound_state_energy"] == pytest.approx(-4.0)   # gamma = 1
    assert doc["time_delay_eigenvalue"] < 0.0


def test_kernel_table(capsys):
    code, out, _ = _run(capsys, "kernel", "--a", "0", "--c", "0.375", "--b", "0.3125,0.3125",
                        "--t", "1", "--start", "vertex")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and set(rows[0]) == {"t", "edge", "y", "density", "atom"}
    assert float(rows[0]["atom"]) == pytest.approx(0.2219706138344328, rel=1e-12)
    assert {r["edge"] for r in rows} == {"1", "2"}


def test_resolvent_table(capsys):
    code, out, _ = _run(capsys, "resolvent", "--b", "0.5,0.5", "--lambda", "2",
                        "--start", "1:0.5", "--run.n_y", "5")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 10


def test_simulate_csv_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        code, _, _ = _run(capsys, "simulate", "--b", "0.5,0.5", "--n-paths", "4", "--dt", "1e-2",
                          "--seed", "7", "--output", str(p))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0]
    assert header == "path_id,time,edge,x,local_time,alive"


def test_simulate_json(capsys):
    code, out, _ = _run(capsys, "simulate", "--b", "0.4,0.4", "--a", "0.2", "--n-paths", "5",
                        "--dt", "1e-2", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert len(doc) == 5 and {"edge", "x", "killed"} <= set(doc[0])


def test_config_round_trip(capsys, tmp_path):
    cfg_path = tmp_path / "cfg.json"
    code, _, _ = _run(capsys, "simulate", "--b", "0.3,0.7", "--c", "0", "--n-paths", "3",
                      "--dt", "1e-2", "--seed", "5", "--emit-config", str(cfg_path))
    assert code == 0
    doc = json.loads(cfg_path.read_text())
    assert doc["boundary"]["b"] == [0.3, 0.7]
    direct, replay = tmp_path / "d.csv", tmp_path / "r.csv"
    _run(capsys, "simulate", "--b", "0.3,0.7", "--c", "0", "--n-paths", "3", "--dt", "1e-2",
         "--seed", "5", "--output", str(direct))
    _run(capsys, "simulate", "--config", str(cfg_path), "--output", str(replay))
    assert direct.read_bytes() == replay.read_bytes()
    # flags override the file
    code, _, _ = _run(capsys, "simulate", "--config", str(cfg_path), "--seed", "6",
                      "--emit-config", str(cfg_path))
    assert json.loads(cfg_path.read_text())["run"]["seed"] == 6


@pytest.mark.parametrize("argv", [
    ["scatter", "--a", "1", "--b", "0", "--c", "0"],          # a = 1
    ["scatter", "--a", "0.5", "--b", "0.2", "--c", "0"],      # not on the simplex
    ["kernel", "--bogus", "1"],
    ["frobnicate"],
    ["kernel", "--n", "3", "--b", "0.5,0.5"],
    ["simulate", "--b", "0.5,0.5", "--start", "3:1.0"],
    ["simulate", "--b", "0.5,0.5", "--format", "xml"],
    ["verify", "--only", "12"],
])
def test_invalid_input_exit_1(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 1
    assert "starwalk:" in err


def test_malformed_and_missing_config(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(capsys, "kernel", "--config", str(bad))[0] == 1
    assert _run(capsys, "kernel", "--config", str(tmp_path / "nope.json"))[0] == 1


def test_unwritable_output(capsys, tmp_path):
    target = tmp_path / "missing" / "out.csv"
    code, _, err = _run(capsys, "simulate", "--b", "1", "--n-paths", "1", "--dt", "1e-2",
                        "--output", str(target))
    assert code == 1 and "starwalk:" in err


def test_verify_subset(capsys, tmp_path):
    out_path = tmp_path / "report.json"
    code, out, err = _run(capsys, "verify", "--run.only", "1,2,11", "--output", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert [d["name"][:3] for d in doc] == ["[1]", "[2]", "[11"]
    assert all(d["passed"] for d in doc)
    assert "PASS" in out and "[PASS]" in err


@pytest.mark.skipif(shutil.which("starwalk") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["starwalk", "scatter", "--b", "0.5,0.5"], capture_output=True,
                         text=True, timeout=120)
    assert res.returncode == 0
    assert "regime = walsh" in res.stdout
