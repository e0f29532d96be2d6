import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from tailsep.cli import main
from tailsep.distributions import RngStream, from_spec, sample


@pytest.fixture
def data_file(tmp_path):
    def write(values, name="data.txt"):
        p = tmp_path / name
        p.write_text("\n".join(str(v) for v in values) + "\n")
        return str(p)

    return write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- test ---------------------------------------------------------------------------------


def test_three_values_two_sided(capsys, data_file):
    code, out, _ = run(capsys, "test", data_file([1, 2, 3]), "--f0", "exp(1)", "--k", "2", "--kind", "two_sided")
    assert code == 0
    assert "R           1.5000000" in out
    assert "z           0.7071" in out
    assert "do not reject H0" in out


def test_lognormal_fixture_rejected_against_wlw(capsys, data_file):
    x = sample(from_spec("lognormal(0,1)"), RngStream(0, 0), 5000)
    code, out, _ = run(capsys, "test", data_file(x), "--f0", "sep_wlw", "--k", "100", "--kind", "light_vs_heavy")
    assert code == 1, out


def test_pareto_fixture_rejected_against_wlw(capsys, data_file):
    x = sample(from_spec("pareto(1)"), RngStream(0, 0), 5000)
    code, out, _ = run(capsys, "test", data_file(x), "--f0", "sep_wlw", "--k", "100")
    assert code == 1 and "reject H0" in out


def test_default_k_rule(capsys, data_file):
    x = sample(from_spec("exponential(1)"), RngStream(1, 0), 500)
    code, out, _ = run(capsys, "test", data_file(x), "--f0", "exp(1)", "--kind", "two_sided")
    assert "n, k        500, 31" in out and code in (0, 1)


def test_blank_lines_ignored(capsys, tmp_path):
    p = tmp_path / "d.txt"
    p.write_text("\n1\n\n2\n   \n3\n\n")
    code, out, _ = run(capsys, "test", str(p), "--f0", "exp(1)", "--k", "2")
    assert code == 0 and "n, k        3, 2" in out


def test_empty_file(capsys, tmp_path):
    p = tmp_path / "empty.txt"
    p.write_text("")
    code, _, err = run(capsys, "test", str(p), "--f0", "exp(1)")
    assert code == 2 and "no data values" in err


def test_non_numeric_line_reported(capsys, tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("1.0\n2.5\nabc\n")
    code, _, err = run(capsys, "test", str(p), "--f0", "exp(1)", "--k", "1")
    assert code == 2 and "line 3" in err


def test_unreadable_file(capsys, tmp_path):
    code, _, err = run(capsys, "test", str(tmp_path / "missing.txt"), "--f0", "exp(1)")
    assert code == 2 and "cannot read" in err


def test_support_violation(capsys, data_file):
    code, _, err = run(capsys, "test", data_file([0.1, 0.2, 0.3, 5.0]), "--f0", "pareto(2)", "--k", "3")
    assert code == 2 and "choose a smaller k" in err


def test_k_too_large(capsys, data_file):
    code, _, err = run(capsys, "test", data_file([1, 2, 3]), "--f0", "exp(1)", "--k", "3")
    assert code == 2 and "k must be < n" in err


def test_bad_spec(capsys, data_file):
    code, _, err = run(capsys, "test", data_file([1, 2, 3]), "--f0", "gumbel", "--k", "1")
    assert code == 2 and "unknown distribution" in err


def test_usage_errors_exit_2(capsys):
    for argv in ([], ["frobnicate"], ["test"], ["check", "--h", "exp(1)"]):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 2
    capsys.readouterr()


# -- simulate --------------------------------------------------------------------------------

LN_CELL = [
    "simulate", "--dist", "lognormal(0,1)", "--f0", "sep_wlw", "--n", "500", "--k", "100",
    "--m", "2000", "--alpha", "0.05", "--kind", "light_vs_heavy", "--seed", "7",
]


def test_simulate_lognormal_cell(capsys):
    code, out, _ = run(capsys, *LN_CELL)
    assert code == 0
    header, row = csv.reader(io.StringIO(out))
    assert header == ["cell", "n", "k", "m", "rate", "se", "support_errors"]
    assert row[0] == "lognormal(0,1)"
    assert float(row[4]) >= 0.98


def test_simulate_deterministic(capsys, tmp_path):
    args = ["simulate", "--dist", "cauchy", "--f0", "sep_wlw", "--n", "200", "--k", "20", "--m", "300"]
    first = run(capsys, *args)[1]
    second = run(capsys, *args)[1]
    assert first == second and first.count("\n") == 2
    out = tmp_path / "o.csv"
    run(capsys, *args, "--out", str(out))
    assert out.read_text() == first


def test_simulate_k_not_below_n(capsys):
    code, _, err = run(capsys, "simulate", "--dist", "lognormal(0,1)", "--f0", "sep_wlw", "--n", "500", "--k", "600")
    assert code == 2 and "k must be < n" in err


def test_simulate_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dist": "exponential(1)", "f0": "exponential(1)", "n": 300, "k": 30, "m": 200}))
    code, out, _ = run(capsys, "simulate", "--config", str(cfg))
    assert code == 0 and out.splitlines()[1].startswith("exponential(1),300,30,200,")
    code, out2, _ = run(capsys, "simulate", "--config", str(cfg), "--seed", "5")
    assert out2 != out
    cfg.write_text(json.dumps({"dist": "exponential(1)", "f0": "exponential(1)", "n": 300, "k": 30, "mm": 2}))
    code, _, err = run(capsys, "simulate", "--config", str(cfg))
    assert code == 2 and "mm" in err


def test_simulate_missing_fields(capsys):
    code, _, err = run(capsys, "simulate", "--dist", "cauchy")
    assert code == 2 and "missing field" in err


# -- table and sweep --------------------------------------------------------------------------------


def test_table_command(capsys):
    code, out, _ = run(capsys, "table", "--id", "table2", "--m", "20", "--seed", "1")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 1 + 6 * 7
    assert lines[1].startswith("log-Pareto(2),100,10,20,")
    rows = list(csv.reader(io.StringIO(out)))
    assert all(len(r) == 7 for r in rows)


def test_sweep_command(capsys):
    code, out, _ = run(
        capsys, "sweep", "--dist", "pareto(0.5)", "--f0", "sep_sqrtlog", "--n", "300",
        "--k-min", "10", "--k-max", "50", "--k-step", "20", "--m", "50", "--xy",
    )
    lines = out.splitlines()
    assert code == 0 and lines[0] == "x,y"
    assert [int(line.split(",")[0]) for line in lines[1:]] == [10, 30, 50]
    assert all(float(line.split(",")[1]) >= 0.9 for line in lines[1:])


# -- check -------------------------------------------------------------------------------------------


def test_check_epsilon_estimate(capsys):
    code, out, _ = run(capsys, "check", "--h", "exp(2)", "--g", "exp(1)", "--cond", "b")
    assert code == 0
    assert float(out.split()[-1]) == pytest.approx(0.5, abs=1e-3)


def test_check_identical_tails(capsys):
    code, out, _ = run(capsys, "check", "--h", "exp(1)", "--g", "exp(1)", "--cond", "b")
    assert code == 1 and float(out.split()[-1]) == 0.0


def test_check_delta(capsys):
    code, out, _ = run(capsys, "check", "--h", "pareto(2)", "--g", "pareto(1)", "--cond", "delta", "--eps", "0.5")
    assert code == 0 and "holds on grid    yes" in out
    code, _, err = run(capsys, "check", "--h", "pareto(2)", "--g", "pareto(1)", "--cond", "delta")
    assert code == 2 and "needs --eps" in err


def test_check_b_violated(capsys):
    code, out, _ = run(capsys, "check", "--h", "exp(2)", "--g", "exp(1)", "--eps", "0.6")
    assert code == 1 and "first violation" in out


def test_check_c_normals(capsys):
    code, out, _ = run(
        capsys, "check", "--h", "normal(0,1)", "--g", "normal(1,1)", "--cond", "c", "--eps", "0.5", "--x0", "2"
    )
    assert code == 0 and "condition        C" in out


def test_check_incompatible_grid(capsys):
    code, _, err = run(capsys, "check", "--h", "exp(1)", "--g", "exp(2)", "--x0", "500")
    assert code == 2 and "must exceed" in err


# -- entry points ---------------------------------------------------------------------------------------


def test_module_entry_point(tmp_path):
    p = tmp_path / "d.txt"
    p.write_text("1\n2\n3\n")
    proc = subprocess.run(
        [sys.executable, "-m", "tailsep", "test", str(p), "--f0", "exp(1)", "--k", "2", "--kind", "two_sided"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and "R           1.5000000" in proc.stdout
