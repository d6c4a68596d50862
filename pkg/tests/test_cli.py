import json
import os
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from k3lab import cli
from k3lab.suite import Options, run_suite

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "k3lab" / "fixtures"


def run(*args, env=None):
    e = dict(os.environ)
    e.update(env or {})
    return subprocess.run([sys.executable, "-m", "k3lab.cli", *args], capture_output=True, text=True, env=e)


def test_polytope_suite_reports():
    reports = run_suite("polytope")
    conditions = [r for r in reports if r.id.endswith(".conditions")]
    fano = {r.id.split(".")[1]: r.witness for r in reports if r.id.endswith(".fano")}
    assert len(conditions) == 5 and all(r.status == "PASS" for r in conditions)
    assert [k for k, w in sorted(fano.items()) if w.startswith("True")] == ["P2", "P3", "P4", "P5"]


def test_lattice_det_m1_report():
    r = {x.id: x for x in run_suite("lattice", Options(families=("1",)))}["lattice.det.M1"]
    assert r.line() == "lattice.det.M1 = PASS (-9)"


def test_family3_periods_report_both_repairs():
    reports = {r.id: r for r in run_suite("periods", Options(families=("3",)))}
    r = reports["periods.3.printed.L1_thm"]
    assert r.status == "ERRATUM"
    assert "repair l<->m in the series" in r.witness and "repair Tl<->Tm in the operator" in r.witness


def test_reports_sorted_and_json_shape(capsys):
    code = cli.main(["verify", "monodromy", "--format", "json"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert [r["id"] for r in out] == sorted(r["id"] for r in out)
    assert set(out[0]) == {"id", "location", "status", "witness", "runtime_ms"}
    assert all(r["runtime_ms"] is None for r in out)


def test_timings_flag_fills_runtime(capsys):
    cli.main(["verify", "polytope", "--format", "json", "--timings"])
    out = json.loads(capsys.readouterr().out)
    assert all(isinstance(r["runtime_ms"], (int, float)) for r in out)


def test_text_format_ends_with_counts(capsys):
    assert cli.main(["verify", "lattice", "--family", "2"]) == 0
    last = capsys.readouterr().out.strip().splitlines()[-1]
    assert last.startswith("PASS=") and "FAIL=0" in last


def test_family_filter():
    ids = [r.id for r in run_suite("fibration", Options(families=("3b",)))]
    assert ids and all(i.startswith("fibration.3b.") for i in ids)


def test_missing_fixture_fails_only_dependent_checks(tmp_path):
    for f in FIXTURES.glob("*.json"):
        shutil.copy(f, tmp_path)
    (tmp_path / "operators.json").unlink()
    p = run("verify", "periods", "--family", "2", "--format", "json", env={"K3LAB_FIXTURES": str(tmp_path)})
    assert p.returncode == 1
    reports = json.loads(p.stdout)
    failed = {r["id"] for r in reports if r["status"] == "FAIL"}
    assert "periods.2.printed.L1_thm" in failed
    assert {r["id"]: r["status"] for r in reports}["periods.2.recurrence"] == "PASS"
    assert all("missing fixture" in r["witness"] for r in reports if r["status"] == "FAIL")


def test_corrupt_fixture_is_a_fail(tmp_path):
    for f in FIXTURES.glob("*.json"):
        shutil.copy(f, tmp_path)
    (tmp_path / "polytopes.json").write_text("{ not json")
    p = run("verify", "polytope", env={"K3LAB_FIXTURES": str(tmp_path)})
    assert p.returncode == 1
    assert "FAIL" in p.stdout


@pytest.mark.parametrize("matrix,expected", [
    ("1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n", {"in_PO": True, "in_PO_plus": True}),
    ("-1 0 0 0\n0 -1 0 0\n0 0 -1 0\n0 0 0 -1\n", {"in_PO": True, "in_PO_plus": True}),
    ("2 0 0 0\n0 2 0 0\n0 0 2 0\n0 0 0 2\n", {"in_PO": False, "in_PO_plus": False}),
])
def test_monodromy_command(tmp_path, capsys, matrix, expected):
    f = tmp_path / "g.txt"
    f.write_text(matrix)
    assert cli.main(["monodromy", "--family", "1", "--check-matrix", str(f)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out == {"family": "1", **expected}


def test_monodromy_command_bad_file(tmp_path, capsys):
    f = tmp_path / "g.txt"
    f.write_text("1 2\n3 4\n")
    assert cli.main(["monodromy", "--family", "2", "--check-matrix", str(f)]) == 2
    assert "four rows" in capsys.readouterr().err


def test_order_option_changes_nothing_exact(capsys):
    cli.main(["verify", "periods", "--family", "2", "--order", "13", "--format", "json"])
    a = json.loads(capsys.readouterr().out)
    assert all(r["status"] != "FAIL" for r in a)
