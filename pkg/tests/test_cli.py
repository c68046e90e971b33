import subprocess
import sys

import numpy as np
import pytest

from superhedge import cli
from superhedge.backtest import synthetic_series
from superhedge.calibration import write_csv

NA_FAILS = """\
# S=100 with children 100 and 200: no immediate profit, but an arbitrage
node 0 parent=- t=0 S=100 p=-
node a parent=0 t=1 S=100 p=0.5
node b parent=0 t=1 S=200 p=0.5
"""

BELOW_SUPPORT = """\
node 0 parent=- t=0 S=70
node a parent=0 t=1 S=80 p=0.5
node b parent=0 t=1 S=120 p=0.5
"""

CHAIN = """\
node r parent=- t=0 S=100
node x parent=r t=1 S=100 p=1
node y parent=x t=2 S=100 p=1
"""


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    report = dict(line.split(": ", 1) for line in out.splitlines() if ": " in line)
    return code, report, err


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return p
    return _write


class TestAnalyzeTree:
    def test_aip_without_na(self, capsys, write):
        code, rep, _ = run(capsys, "analyze-tree", write("t.txt", NA_FAILS), "--payoff", "call:100")
        assert code == 0
        assert rep["AIP"] == "yes" and rep["NA"].startswith("no")
        assert rep["acmm"] == "found" and rep["AWIP"] == "yes"
        assert rep["price"] == "0"
        # all mass on the flat child; density 1 / P(a) = 2
        assert float(rep["rho.a"]) == pytest.approx(2.0) and float(rep["rho.b"]) == pytest.approx(0.0)

    def test_immediate_profit(self, capsys, write):
        code, rep, _ = run(capsys, "analyze-tree", write("t.txt", BELOW_SUPPORT))
        assert code == 0
        assert rep["AIP"] == "no (immediate profit at node 0)"
        assert rep["acmm"] == "infeasible" and rep["price"] == "-inf"

    def test_chain_price_is_leaf_payoff(self, capsys, write):
        _, rep, _ = run(capsys, "analyze-tree", write("t.txt", CHAIN), "--payoff", "linear:1,5")
        assert rep["price"] == "105"
        assert rep["node.x"] == "t=1 S=100 AIP=yes NA=yes price=105 theta=0"

    def test_parse_error_has_line(self, capsys, write):
        code, _, err = run(capsys, "analyze-tree", write("t.txt", NA_FAILS.replace("t=1 S=200", "t=1 S=abc")))
        assert code == cli.EXIT_INPUT and "line 4" in err

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "analyze-tree", tmp_path / "nope.txt")[0] == cli.EXIT_INPUT


class TestPrice:
    def test_worked_example_from_config(self, capsys, write, tmp_path):
        cfg = write("m.cfg", "S0 = 100\nn = 2\nk_d = 0.5\nk_u = 2  # both steps\npayoff = call:100\n")
        lat = tmp_path / "lattice.tsv"
        code, rep, _ = run(capsys, "price", "--config", cfg, "--exact", "--lattice", lat)
        assert code == 0
        assert float(rep["price"]) == pytest.approx(100 / 3, abs=1e-9)
        assert rep["price_exact"] == "100/3"
        assert float(rep["theta0"]) == pytest.approx(2 / 3)
        assert lat.read_text().splitlines()[0] == "t\tx\th\ttheta"

    def test_env_config_and_flag_override(self, capsys, write, monkeypatch):
        monkeypatch.setenv(cli.CONFIG_ENV, str(write("m.cfg", "S0=100\nn=2\nk_d=0.5\nk_u=2\n")))
        _, rep, _ = run(capsys, "price", "--payoff", "zero")
        assert rep["price"] == "0"
        _, rep, _ = run(capsys, "price", "--strike", "400")
        assert rep["payoff"] == "call:400.0" and rep["price"] == "0"

    def test_bs_check(self, capsys):
        code, rep, _ = run(capsys, "price", "--S0", 100, "--n", 400, "--sigma", 0.2, "--bs-check")
        assert code == 0
        assert float(rep["bs_reference"]) == pytest.approx(7.9655674554, abs=1e-9)
        assert float(rep["bs_abs_error"]) <= 0.15

    def test_aip_violation_exit_code(self, capsys):
        code, _, err = run(capsys, "price", "--S0", 100, "--n", 3, "--k-d", "0.9,1.05,0.9", "--k-u", "1.1")
        assert code == cli.EXIT_AIP and "step 1" in err

    @pytest.mark.parametrize(
        "text", ["S0=100\nn=2\nkd=0.5\n", "S0=100\nn=two\n", "S0 100\n", "S0=100\nn=2\nk_d=0.5\n", "S0=1\nn=1\nk_u=nan\n"]
    )
    def test_bad_config(self, capsys, write, text):
        assert run(capsys, "price", "--config", write("m.cfg", text))[0] == cli.EXIT_INPUT

    def test_nonconvex_payoff_rejected(self, capsys):
        code = run(capsys, "price", "--S0", 100, "--n", 2, "--k-d", 0.5, "--k-u", 2, "--payoff", "linear:1,-5")[0]
        assert code == cli.EXIT_INPUT


class TestSeries:
    @pytest.fixture
    def csv(self, tmp_path):
        s = synthetic_series(np.random.default_rng(4), 14, (0.97, 0.98, 0.96, 0.99), (1.03, 1.02, 1.05, 1.01))
        write_csv(s, tmp_path / "s.csv")
        return tmp_path / "s.csv"

    def test_calibrate(self, capsys, csv):
        code, rep, _ = run(capsys, "calibrate", csv, "--window", 8)
        assert code == 0
        assert rep["coverage"] == "1" and rep["steps"] == "4"
        assert [float(v) for v in rep["k_u"].split(",")] == pytest.approx([1.03, 1.02, 1.05, 1.01])
        _, rep, _ = run(capsys, "calibrate", csv, "--window", 8, "--estimator", "asymmetric", "--pooled")
        assert rep["steps"] == "1" and float(rep["k_d"]) == pytest.approx(0.96)

    def test_backtest(self, capsys, csv, tmp_path):
        code, rep, _ = run(capsys, "backtest", csv, "--window", 8, "--episodes-out", tmp_path / "e.tsv",
                           "--histogram-out", tmp_path / "h.tsv", "--bins", 5)
        assert code == 0
        assert rep["episodes"] == "6" and rep["p_neg"] == "0" and rep["uncovered_episodes"] == "0"
        assert len((tmp_path / "e.tsv").read_text().splitlines()) == 7
        assert len((tmp_path / "h.tsv").read_text().splitlines()) == 6

    def test_insufficient_data(self, capsys, csv):
        assert run(capsys, "backtest", csv, "--window", 52)[0] == cli.EXIT_DATA
        assert run(capsys, "calibrate", csv, "--window", 52)[0] == cli.EXIT_DATA

    def test_bad_csv(self, capsys, write):
        code, _, err = run(capsys, "backtest", write("b.csv", "date,close\n2024-01-01,x\n"))
        assert code == cli.EXIT_INPUT and "line 2" in err


def test_selftest(capsys):
    code, rep, _ = run(capsys, "selftest", "--seed", 3, "--trees", 10)
    assert code == 0 and rep["tree_dp"] == rep["aip_acmm"] == rep["interval"] == "pass"


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "superhedge.cli", "price", "--S0", "100", "--n", "2",
                          "--k-d", "0.5", "--k-u", "2"], capture_output=True, text=True)
    assert out.returncode == 0 and "price: 33.3333333333" in out.stdout
