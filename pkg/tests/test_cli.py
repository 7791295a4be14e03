import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from mvfam import cli

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_ok(capsys):
    code, out, _ = run(capsys, "verify", "--family", DATA / "small_m2.json")
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "ok"
    assert rep["result"]["t"] == 2 and rep["result"]["q"] == 2
    assert set(rep) == {"version", "command", "config", "status", "result", "error", "timing"}


def test_verify_invariant_violation(capsys, tmp_path):
    f = tmp_path / "bad.json"
    f.write_text(json.dumps({"m": 2, "n": 2, "U": [[1, 0], [1, 0]], "V": [[0, 1], [0, 1]]}))
    code, out, err = run(capsys, "verify", "--family", f)
    assert code == 1
    assert json.loads(out)["error"]["type"] == "TwinPair"
    assert "TwinPair" in err


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "verify")[0] == 2
    assert run(capsys, "verify", "--family", tmp_path / "missing.json")[0] == 2
    assert run(capsys, "bounds", "--m", 1, "--n", 2)[0] == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["search", "--m", "x"])
    assert exc.value.code == 2


def test_rank_and_colrank(capsys):
    code, out, _ = run(capsys, "rank", "--matrix", DATA / "rank_example.json")
    r = json.loads(out)["result"]
    assert code == 0 and r["rank"] == 1 and r["colspan_size"] == 6 and r["sandwich_holds"]
    code, out, _ = run(capsys, "colrank", "--family", DATA / "small_m2.json")
    assert json.loads(out)["result"]["colspan_size"] == 4


def test_search(capsys):
    code, out, _ = run(capsys, "search", "--m", 3, "--n", 2)
    assert code == 0 and json.loads(out)["result"]["t_max"] == 4


def test_bounds_csv(capsys):
    code, out, _ = run(capsys, "bounds", "--m", 3, "--n", 2, "--n-max", 4, "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0][:3] == ["m", "n", "q"] and len(rows) == 4
    assert rows[1][5] == "4"


def test_bounds_violation_exit(capsys):
    code, out, _ = run(capsys, "bounds", "--m", 3, "--n", 2, "--family-size", 5)
    assert code == 1 and json.loads(out)["status"] == "invariant_violation"


def test_refine_and_iterate(capsys):
    code, out, _ = run(capsys, "refine", "--family", DATA / "uniform_6_9.json")
    assert code == 0 and json.loads(out)["result"]["s"] == 6
    code, out, _ = run(capsys, "iterate", "--family", DATA / "disguised_6_18.json")
    r = json.loads(out)["result"]
    assert code == 0 and r["status"] == "zero"
    code, out, _ = run(capsys, "refine", "--family", DATA / "small_m2.json")
    assert code == 1


def test_spectrum_and_rectangle(capsys):
    code, out, _ = run(capsys, "spectrum", "--family", DATA / "small_m2.json", "--eps", 0.5)
    assert code == 0 and json.loads(out)["result"]["size"] >= 1
    code, out, _ = run(capsys, "rectangle", "--family", DATA / "uniform_6_7.json", "--s", 2)
    assert code == 0 and json.loads(out)["result"]["side"] >= 1


def test_ldc_sim_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for f in (a, b):
        code, _, _ = run(capsys, "ldc-sim", "--family", DATA / "uniform_6_7.json", "--trials", 300,
                         "--seed", 5, "--out", f)
        assert code == 0
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    assert ra["result"] == rb["result"]
    assert ra["result"]["trials"] == 300


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('seed = 3\n[ldc-sim]\ntrials = 50\ndelta = 0.1\n')
    code, out, _ = run(capsys, "ldc-sim", "--config", cfg, "--family", DATA / "small_m2.json", "--trials", 70)
    c = json.loads(out)["config"]
    assert code == 0 and c["trials"] == 70 and c["delta"] == 0.1 and c["seed"] == 3
    cfg.write_text("bogus = 1\n")
    assert run(capsys, "verify", "--config", cfg, "--family", DATA / "small_m2.json")[0] == 2


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0 and set(json.loads(out)["result"]["groups"]) == {"zm", "linalg", "family", "spectral", "bounds", "ldc"}
    code, out, _ = run(capsys, "rank", "--selftest")
    assert code == 0 and list(json.loads(out)["result"]["groups"]) == ["linalg"]


def test_console_entry_point():
    p = subprocess.run([sys.executable, "-m", "mvfam.cli", "--version"], capture_output=True, text=True)
    assert p.returncode == 0 and "mvfam" in p.stdout
