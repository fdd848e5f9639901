import json
import subprocess
import sys

import pytest

from maxqap.cli import cli
from maxqap.harness import CSV_COLUMNS
from maxqap.instances import load_instance


@pytest.fixture
def list_file(tmp_path):
    path = tmp_path / "i.json"
    assert cli(["gen", "--n", "4", "--variant", "list", "--k", "1", "--seed", "7", "--out", str(path)]) == 0
    return path


@pytest.fixture
def b_file(tmp_path):
    path = tmp_path / "b.json"
    assert cli(["gen", "--n", "4", "--variant", "bmatch", "--b", "2", "--seed", "3", "--out", str(path)]) == 0
    return path


def test_gen_writes_instance(list_file, tmp_path):
    inst = load_instance(list_file.read_bytes())
    assert inst.n == 4 and inst.k == 1
    again = tmp_path / "again.json"
    cli(["gen", "--n", "4", "--variant", "list", "--k", "1", "--seed", "7", "--out", str(again)])
    assert again.read_bytes() == list_file.read_bytes()


def test_solve_lp_and_dump(list_file, tmp_path, capsys):
    assert cli(["solve-lp", "--instance", str(list_file)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["objective"] >= 0 and len(out["x"]) == 4
    dump = tmp_path / "m.lp"
    assert cli(["solve-lp", "--instance", str(list_file), "--dump-lp", "--out", str(dump)]) == 0
    assert dump.read_text().startswith("max: ")


def test_round_and_exact(list_file, b_file, capsys):
    assert cli(["round", "--instance", str(list_file), "--seed", "2", "--trials", "3"]) == 0
    rounded = json.loads(capsys.readouterr().out)
    assert [r["seed"] for r in rounded["runs"]] == [2, 3, 4]
    assert cli(["exact", "--instance", str(list_file)]) == 0
    exact = json.loads(capsys.readouterr().out)
    assert all(r["value"] <= exact["value"] + 1e-9 for r in rounded["runs"])
    assert exact["value"] <= rounded["lp"] + 1e-6
    assert cli(["round", "--instance", str(b_file)]) == 0
    assert cli(["exact", "--instance", str(b_file)]) == 0


def test_ratio_from_config_is_reproducible(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"variant": "list", "n": [3, 4], "seeds": 4}))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli(["ratio", "--config", str(cfg), "--out", str(a)]) == 0
    assert cli(["ratio", "--config", str(cfg), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 9


def test_ratio_from_flags(tmp_path):
    out = tmp_path / "r.csv"
    assert cli(["ratio", "--n", "3", "--variant", "bmatch", "--b", "2", "--trials", "2", "--timing",
                "--out", str(out)]) == 0
    row = out.read_text().splitlines()[1].split(",")
    assert row[0] == "bmatch" and row[-1] != ""


def test_verify_lemmas(list_file, tmp_path):
    out = tmp_path / "rep.json"
    code = cli(["verify-lemmas", "--instance", str(list_file), "--trials", "2000", "--seed", "1",
                "--out", str(out)])
    report = json.loads(out.read_text())
    assert code == (0 if report["passed"] else 1)
    assert [r["name"] for r in report["reports"]] == ["left-rounding", "star-rounding"]


def test_errors_exit_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "wG": [[0, -1], [-1, 0]], "wH": [[0, 1], [1, 0]]}')
    assert cli(["solve-lp", "--instance", str(bad)]) == 2
    assert "negative weight" in capsys.readouterr().err
    assert cli(["exact", "--instance", str(tmp_path / "missing.json")]) == 2
    big = tmp_path / "big.json"
    cli(["gen", "--n", "8", "--out", str(big)])
    assert cli(["exact", "--instance", str(big)]) == 2
    with pytest.raises(SystemExit):
        cli(["gen"])
    with pytest.raises(SystemExit):
        cli(["ratio"])


def test_module_entry_point(list_file):
    out = subprocess.run([sys.executable, "-m", "maxqap", "exact", "--instance", str(list_file)],
                         capture_output=True, text=True, check=True)
    assert "witness" in json.loads(out.stdout)
