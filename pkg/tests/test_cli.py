"""CLI thin client: report formats, exit codes, file handling."""

import csv
import io
import json
from pathlib import Path

import pytest

from superhedge.cli import main

DATA = Path(__file__).parent / "data"
MARKET = str(DATA / "market_demo.json")
PAYOFF = str(DATA / "payoff_basket.json")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_price_json(capsys):
    code, out, _ = run(capsys, "price", "--market", MARKET, "--payoff", PAYOFF)
    assert code == 0
    body = json.loads(out)
    assert body["step"] == 0
    assert body["upper_price"] == pytest.approx(125 / 18, abs=1e-9)
    # reals carry 12 significant digits
    assert "6.94444444444" in out


def test_price_at_state(capsys):
    code, out, _ = run(
        capsys,
        "price", "--market", MARKET, "--payoff", PAYOFF, "--state", "01", "--step", "1",
    )
    assert code == 0
    assert json.loads(out)["upper_price"] == pytest.approx(16 / 3, abs=1e-9)


def test_price_naive_mode(capsys):
    code, out, _ = run(
        capsys,
        "price", "--market", MARKET, "--payoff", PAYOFF, "--mode", "naive",
    )
    assert code == 0
    assert json.loads(out)["upper_price"] == pytest.approx(125 / 18, abs=1e-9)


def test_hedge_json(capsys):
    code, out, _ = run(
        capsys,
        "hedge", "--market", MARKET, "--payoff", PAYOFF, "--state", "01",
    )
    assert code == 0
    body = json.loads(out)
    assert body["alpha"] == pytest.approx([-0.48, 0.0, 4 / 9], abs=1e-9)
    assert body["setup_cost"] == pytest.approx(16 / 3, abs=1e-9)


def test_backtest_csv(capsys):
    code, out, _ = run(
        capsys,
        "backtest", "--market", MARKET, "--payoff", PAYOFF, "--state", "01,01",
    )
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["step", "state", "setup_cost", "upper_price", "delta", "delta_discounted"]
    assert rows[1][0] == "0" and float(rows[1][2]) == pytest.approx(125 / 18, abs=1e-9)
    assert float(rows[2][4]) == pytest.approx(31 / 6, abs=1e-9)
    assert float(rows[3][4]) == pytest.approx(12.0, abs=1e-9)
    assert rows[3][2] == ""  # no setup cost at maturity
    assert rows[4][0] == "accumulated"
    assert float(rows[4][5]) == pytest.approx(103 / 6, abs=1e-9)


def test_backtest_json(capsys):
    code, out, _ = run(
        capsys,
        "backtest", "--market", MARKET, "--payoff", PAYOFF,
        "--state", "01,01", "--format", "json",
    )
    assert code == 0
    assert json.loads(out)["accumulated"] == pytest.approx(103 / 6, abs=1e-9)


def test_verify_exits_zero(capsys):
    code, out, _ = run(capsys, "verify", "--market", MARKET, "--payoff", PAYOFF)
    assert code == 0
    body = json.loads(out)
    assert body["passed"] is True


def test_verify_csv(capsys):
    code, out, _ = run(
        capsys, "verify", "--market", MARKET, "--payoff", PAYOFF, "--format", "csv"
    )
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["step", "state", "upper_price", "oracle", "deviation"]
    assert rows[-1][0] == "max"


def test_verify_zero_tolerance_exits_two(capsys):
    # rounding-level deviations exist, so a zero tolerance must fail
    code, out, err = run(
        capsys, "verify", "--market", MARKET, "--payoff", PAYOFF, "--tol", "0.0"
    )
    assert code == 2
    assert json.loads(out)["passed"] is False
    assert "verification failed" in err


def test_out_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = run(
        capsys,
        "price", "--market", MARKET, "--payoff", PAYOFF, "--out", str(target),
    )
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["upper_price"] == pytest.approx(125 / 18, abs=1e-9)


def test_missing_file_is_input_error(capsys):
    code, _, err = run(capsys, "price", "--market", "no-such.json", "--payoff", PAYOFF)
    assert code == 1
    assert "cannot read" in err


def test_invalid_market_is_input_error(tmp_path, capsys):
    bad = tmp_path / "market.json"
    bad.write_text(
        json.dumps(
            {
                "rate_factor": 1.0,
                "num_steps": 2,
                "cash_s0": 100.0,
                "assets": [{"s0": 100.0, "down": 1.1, "up": 1.2}],
            }
        )
    )
    payoff = tmp_path / "payoff.json"
    payoff.write_text(json.dumps({"basket_call": {"weights": [1.0], "strike": 100.0}}))
    code, _, err = run(capsys, "price", "--market", str(bad), "--payoff", str(payoff))
    assert code == 1
    assert "down" in err or "rate" in err


def test_reparsed_files_give_bit_identical_results(tmp_path, capsys):
    code, first, _ = run(capsys, "price", "--market", MARKET, "--payoff", PAYOFF)
    assert code == 0
    # serialize, reparse, re-run: identical bytes out
    market_copy = tmp_path / "m.json"
    market_copy.write_text(json.dumps(json.loads(Path(MARKET).read_text())))
    payoff_copy = tmp_path / "p.json"
    payoff_copy.write_text(json.dumps(json.loads(Path(PAYOFF).read_text())))
    code, second, _ = run(
        capsys, "price", "--market", str(market_copy), "--payoff", str(payoff_copy)
    )
    assert code == 0
    assert second == first
