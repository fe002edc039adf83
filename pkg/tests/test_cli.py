import csv
import io
import json

import pytest

from contourheat.cli import main

FAST_MESH = ["--mesh-m", "8", "--q", "6", "--delta", "1e-4"]


def test_quad_table_stdout_csv(capsys):
    code = main(["quad-table", "--q", "4", "--delta", "1e-6", "--t", "0.5"])
    assert code == 0
    out = capsys.readouterr().out
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["j", "xi_j", "x_j", "y_j", "abs_dz_j", "eps_j"]
    assert len(rows) == 1 + 9
    assert rows[1][0] == "-4" and rows[-1][0] == "4"


def test_cg_table_json_file(tmp_path):
    path = tmp_path / "cg.json"
    code = main(
        [
            "cg-table", "--q", "3", "--lambda1", "1.0138", "--lambdaN", "4006.79",
            "--out", str(path), "--format", "json",
        ]
    )
    assert code == 0
    payload = json.loads(path.read_text())
    assert payload["columns"][0] == "j"
    assert len(payload["rows"]) == 4
    assert payload["meta"]["lambda_n"] == 4006.79


def test_richardson_table_mesh_free(capsys):
    code = main(
        ["richardson-table", "--q", "3", "--lambda1", "1.0138", "--lambdaN", "4006.79"]
    )
    assert code == 0
    header = capsys.readouterr().out.splitlines()[0]
    assert header.startswith("j,x_j,y_j,rho,phi,eps,inv_rho")


def test_solve_success_summary(capsys):
    code = main(["solve"] + FAST_MESH)
    captured = capsys.readouterr()
    assert code == 0
    assert "solved 7 points" in captured.err
    assert "converged 7/7" in captured.err
    rows = list(csv.reader(io.StringIO(captured.out)))
    assert rows[0] == ["t", "u_norm", "error"]
    assert float(rows[1][2]) < 5e-3


def test_solve_partial_convergence_exit_code(tmp_path, capsys):
    path = tmp_path / "solve.json"
    code = main(
        ["solve"] + FAST_MESH + [
            "--method", "richardson", "--precond", "none",
            "--max-iterations", "5", "--out", str(path), "--format", "json",
        ]
    )
    capsys.readouterr()
    assert code == 2
    payload = json.loads(path.read_text())
    assert any(not p["converged"] for p in payload["meta"]["points"])


def test_history_requires_j_and_bounds(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["history"] + FAST_MESH)
    assert exc.value.code == 2  # argparse usage error
    capsys.readouterr()
    code = main(["history"] + FAST_MESH + ["--j", "99"])
    captured = capsys.readouterr()
    assert code == 1
    assert "contourheat: error:" in captured.err


def test_history_emits_measures(capsys):
    code = main(["history"] + FAST_MESH + ["--j", "2", "--format", "json"])
    captured = capsys.readouterr()
    assert code == 0
    payload = json.loads(captured.out)
    assert payload["columns"] == ["n", "measure"]
    assert payload["meta"]["j"] == 2
    assert payload["meta"]["converged"] is True
    measures = [row[1] for row in payload["rows"]]
    assert measures[-1] <= payload["meta"]["tolerance"]


def test_config_error_exit_code(capsys):
    code = main(["solve", "--q", "0"])
    captured = capsys.readouterr()
    assert code == 1
    assert "contourheat: error:" in captured.err
    assert captured.out == ""


def test_iterations_table_small(capsys):
    code = main(["iterations-table", "--mesh-m", "8", "--q", "2", "--delta", "1e-3"])
    captured = capsys.readouterr()
    assert code == 0
    rows = list(csv.reader(io.StringIO(captured.out)))
    assert rows[0][:4] == ["j", "rich_inv", "rich_sgs3", "cg_none"]
    assert len(rows) == 1 + 3


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_module_execution_entry_point():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "contourheat", "quad-table", "--q", "2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    rows = list(csv.DictReader(io.StringIO(proc.stdout)))
    assert [int(r["j"]) for r in rows] == [-2, -1, 0, 1, 2]
