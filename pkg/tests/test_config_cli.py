import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from hscalc.cli import main
from hscalc.config import load_config, parse_complex_list
from hscalc.errors import HSCalcError
from hscalc.operators import TestOperator, read_matrix

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_complex_list():
    assert parse_complex_list("1, 2i, 1+2i") == [1, 2j, 1 + 2j]


def test_load_suite_config():
    cfg = load_config(CONFIGS / "smt_suite.ini")
    assert list(cfg.functions) == ["rational", "shifted_bump"]
    assert cfg.functions["shifted_bump"].scalar == 2
    assert isinstance(cfg.operators["jordan"].matrix, TestOperator)
    assert cfg.quad.levels == 4 and cfg.quad.target_tol == 1e-4


def test_inline_matrix_and_table(tmp_path):
    (tmp_path / "t.csv").write_text("x,y\n" + "\n".join(f"{x},{np.exp(-x * x)}" for x in np.linspace(-4, 4, 41)))
    cfg = load_config(write(tmp_path, """
[function]
kind = custom-table
file = t.csv
[operator]
matrix = 1 0.5; 0 2
enclosure = 1, 2
[quadrature]
nx = 64
n = 3
"""))
    f = cfg.function().function
    assert f(0.0) == pytest.approx(1.0, abs=1e-4)
    op = cfg.operator()
    np.testing.assert_array_equal(op.matrix, [[1, 0.5], [0, 2]])
    assert op.enclosure == (1.0, 2.0)
    assert cfg.quad.nx == 64 and cfg.n == 3


@pytest.mark.parametrize("text", [
    "[function]\nkind = sine\n",
    "[widget]\nx = 1\n",
    "[function]\nkind = bump\na = 2\nb = 1\n",
])
def test_bad_configs(tmp_path, text):
    with pytest.raises(HSCalcError):
        load_config(write(tmp_path, text))


def test_missing_config_file(tmp_path):
    with pytest.raises(HSCalcError):
        load_config(tmp_path / "nope.ini")


def test_cli_apply_writes_matrix(tmp_path, capsys):
    code = main(["apply", "--config", str(CONFIGS / "char_jordan.ini"), "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("levels=") and " est=" in out and " n=" in out and " cells=" in out
    with open(tmp_path / "result.txt") as fh:
        M = read_matrix(fh)
    assert np.linalg.norm(M - np.eye(4)) <= 1e-3


def test_cli_apply_contour_json(tmp_path, capsys):
    code = main(["apply", "--config", str(CONFIGS / "char_jordan.ini"), "--method", "contour",
                 "--out", str(tmp_path), "--json"])
    payload = json.loads(capsys.readouterr().out)
    assert code == 0 and payload["converged"]


def test_cli_verify_smt(tmp_path, capsys):
    code = main(["verify-smt", "--config", str(CONFIGS / "smt_suite.ini"), "--out", str(tmp_path), "--json"])
    lines = capsys.readouterr().out.strip().splitlines()
    assert code == 0
    rows = [json.loads(s) for s in lines]
    assert len(rows) == 5 and rows[-1]["ok"]
    assert (tmp_path / "smt.csv").read_text().startswith("operator_id,")


def test_cli_verify_smt_fails_on_tight_tolerance(tmp_path, capsys):
    code = main(["verify-smt", "--config", str(CONFIGS / "smt_suite.ini"), "--out", str(tmp_path),
                 "--tol", "1e-13", "--levels", "2"])
    assert code == 1
    assert capsys.readouterr().out.rstrip().endswith("FAIL")


def test_cli_convergence_table(tmp_path, capsys):
    code = main(["convergence-table", "--config", str(CONFIGS / "bump_order.ini"), "--out", str(tmp_path), "--json"])
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert all(3 <= q <= 5 for q in payload["ratios"])
    assert len((tmp_path / "convergence.csv").read_text().splitlines()) == 4


def test_cli_seeley_exact(capsys):
    assert main(["seeley-extend", "--K", "1"]) == 0
    out = capsys.readouterr().out
    assert "a_0 = 3" in out and "a_1 = -2" in out and "all zero" in out


def test_cli_seeley_table(tmp_path, capsys):
    code = main(["seeley-extend", "--config", str(CONFIGS / "heat.ini"), "--K", "4", "--out", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "seeley.csv").read_text().splitlines()
    assert lines[0] == "x,F,F',F''" and len(lines) == 72


def test_cli_fit_bound(capsys):
    assert main(["fit-bound", "--config", str(CONFIGS / "heat.ini")]) == 0
    out = capsys.readouterr().out
    assert out.startswith("c=") and "alpha=0.0000" in out


def test_cli_char_one(capsys):
    assert main(["char-one", "--config", str(CONFIGS / "char_jordan.ini"), "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["ok"] and payload["contour"] < 1e-10


def test_cli_errors_exit_two(tmp_path, capsys):
    assert main(["apply", "--config", str(tmp_path / "missing.ini")]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_rejects_bad_n():
    with pytest.raises(SystemExit):
        main(["apply", "--n", "two"])


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "hscalc.cli", "seeley-extend", "--K", "0"],
                         capture_output=True, text=True, check=True).stdout
    assert "a_0 = 1" in out
