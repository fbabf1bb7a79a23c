from __future__ import annotations

import json
import subprocess
import sys

import pytest

from subhex.cli import EXIT_BUDGET, EXIT_FAILED, EXIT_OK, main
from subhex.geometry import load

KEYS = {"command", "geometry", "parameters", "results", "nodes_expanded", "wall_seconds", "status", "deductions"}


def run(capsys, *argv):
    code = main(list(argv))
    out = json.loads(capsys.readouterr().out)
    return code, out


def test_construct_and_verify(capsys, tmp_path, h2):
    path = tmp_path / "h2.json"
    code, out = run(capsys, "construct", "split_cayley", "2", "--out", str(path), "--seed-check")
    assert code == EXIT_OK and set(out) == KEYS
    assert out["results"]["num_points"] == 63 and out["results"]["self_check"]
    assert load(path) == h2
    code, out = run(capsys, "verify", str(path))
    assert code == EXIT_OK and out["results"]["passed"] and out["results"]["order"] == [2, 2]


def test_verify_failure(capsys, tmp_path):
    path = tmp_path / "grid.txt"
    path.write_text("p 9 l 6\n0 1 2\n3 4 5\n6 7 8\n0 3 6\n1 4 7\n2 5 8\n")
    code, out = run(capsys, "verify", str(path))
    assert code == EXIT_FAILED and not out["results"]["passed"]


def test_ovoids(capsys):
    code, out = run(capsys, "ovoids", "split_cayley:2", "--count")
    assert code == EXIT_OK and out["results"]["count"] == 36 and out["results"]["sizes"] == [21]
    code, out = run(capsys, "ovoids", "split_cayley:2", "--enumerate", "--limit", "2")
    assert code == EXIT_OK and len(out["results"]["ovoids"]) == 2
    code, out = run(capsys, "ovoids", "dual_split_cayley:4", "--nodes", "1000")
    assert code == EXIT_BUDGET and out["status"] == "BudgetExhausted"


def test_semisingular(capsys):
    code, out = run(capsys, "semisingular", "split_cayley:3", "--center", "4", "--count")
    assert code == EXIT_OK and out["results"]["count"] == 24 and out["results"]["sizes"] == [94]


def test_check_commands(capsys):
    code, out = run(capsys, "check-no-ovoids", "dual_split_cayley:2")
    assert code == EXIT_OK and out["deductions"][0]["rule"] == "Cor-ovoids"
    code, out = run(capsys, "check-no-ovoids", "split_cayley:3")
    assert code == EXIT_FAILED and out["deductions"] == []
    code, out = run(capsys, "check-h3", "split_cayley:3")
    assert code == EXIT_OK and out["deductions"][0]["rule"] == "Lem-main2"
    code, out = run(capsys, "check-h3", "split_cayley:3", "--threshold", "91")
    assert code == EXIT_FAILED and out["results"]["counterexample"]
    code, out = run(capsys, "check-pairs", "split_cayley:2", "--all-pairs")
    assert code == EXIT_OK and out["results"]["pairs_checked"] == 2016
    code, out = run(capsys, "check-pairs", "split_cayley:2", "--pair", "0", "1")
    assert code == 1 and out["error"] == "NoDistance3Pair"


def test_check_pairs_resume(capsys, tmp_path):
    ck = tmp_path / "ck.json"
    code, out = run(capsys, "check-pairs", "split_cayley:2", "--all-pairs", "--checkpoint", str(ck))
    assert code == EXIT_OK and ck.exists()
    code, again = run(capsys, "check-pairs", "split_cayley:2", "--all-pairs", "--resume", str(ck))
    assert code == EXIT_OK and again["results"]["min_intersection"] == out["results"]["min_intersection"]


def test_aut_and_identity(capsys):
    code, out = run(capsys, "aut", "dual_flag:2")
    assert code == EXIT_OK and out["results"]["group_order"] == "336"
    code, out = run(capsys, "aut", "split_cayley:3", "--nodes", "2")
    assert code == EXIT_BUDGET
    code, out = run(capsys, "identity", "--max", "8")
    assert code == EXIT_OK and out["results"]["passed"]


def test_report_quick(capsys):
    code, out = run(capsys, "report", "--quick", "--json")
    assert code == EXIT_OK
    rules = sorted(d["rule"] for d in out["deductions"])
    assert rules == ["Cor-ovoids", "Lem-intersecting", "Lem-main2"]


def test_missing_file(capsys):
    code, out = run(capsys, "verify", "no/such/file.json")
    assert code == 1 and out["error"] == "FileNotFoundError"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "subhex.cli", "identity", "--max", "3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["cases"] == sum(3 * (s + 2) for s in range(1, 4))
