import json
import subprocess
import sys

import pytest

from m1chain.bethe import solution_to_json, special_solution
from m1chain.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_spectrum_text(capsys):
    code, out, _ = run(capsys, "spectrum", "--n", "8")
    assert code == 0
    assert "PASS" in out and "FAIL" not in out


def test_spectrum_json_and_out_file(tmp_path, capsys):
    p = tmp_path / "s.json"
    code, out, _ = run(capsys, "spectrum", "--n", "8", "--model", "pxp", "--mu", "0.5", "--format", "json", "--out", str(p))
    assert code == 0 and out == ""
    doc = json.loads(p.read_text())
    assert doc["ok"] is True
    assert doc["config"]["mu"] == 0.5
    assert "version" in doc and "timestamp" in doc


def test_table_integers(capsys):
    code, out, _ = run(capsys, "table-integers", "--n", "12")
    assert code == 0
    assert "4 | 0 (x 2), 4 (x 3), 5 (x 6)" in out


def test_quench_csv(capsys):
    code, out, _ = run(capsys, "quench", "--n", "10", "--tmax", "2", "--samples", "21", "--format", "csv", "--analytic")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("t,fidelity")
    assert len(lines) == 22


def test_quench_single_large_n_uses_closed_forms(capsys):
    code, out, _ = run(capsys, "quench", "--n", "30", "--init", "single", "--analytic", "--tmax", "5", "--samples", "11", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["ok"]


def test_quench_krylov_json(capsys):
    code, out, _ = run(capsys, "quench", "--n", "12", "--mu", "1", "--method", "krylov", "--tmax", "3", "--samples", "31", "--format", "json")
    assert code == 0 and json.loads(out)["ok"]


def test_bethe_verify_families(capsys):
    assert run(capsys, "bethe-verify", "--n", "12", "--family", "special", "--f", "3")[0] == 0
    assert run(capsys, "bethe-verify", "--n", "9", "--family", "single")[0] == 0
    assert run(capsys, "bethe-verify", "--n", "5", "--family", "dressed", "--n-plus", "1")[0] == 0


def test_bethe_verify_perturbed_fails(capsys):
    code, out, _ = run(capsys, "bethe-verify", "--n", "12", "--f", "3", "--perturb", "1e-4")
    assert code == 1 and "FAIL" in out


def test_bethe_verify_file(tmp_path, capsys):
    p = tmp_path / "sol.json"
    p.write_text(solution_to_json(special_solution(9, 2)))
    assert run(capsys, "bethe-verify", "--n", "9", "--file", str(p))[0] == 0
    p.write_text("{\"N\": 9}")
    assert run(capsys, "bethe-verify", "--n", "9", "--file", str(p))[0] == 2


def test_mps_check(capsys):
    code, out, _ = run(capsys, "mps-check", "--n", "12", "--f", "3")
    assert code == 0 and "FAIL" not in out
    code, out, _ = run(capsys, "mps-check", "--n", "12", "--f", "2")
    assert code == 0 and "inadmissible" in out.lower()


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--n", "2"],
        ["spectrum", "--n", "8", "--format", "csv"],
        ["quench", "--n", "9", "--init", "z2"],
        ["spectrum", "--n", "8", "--out", "/nonexistent/dir/x.txt"],
    ],
)
def test_input_errors_exit_2(argv, capsys):
    assert run(capsys, *argv)[0] == 2


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "m1chain.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip()
