"""Hedge construction, residuals and backtests."""

import random

import pytest

import superhedge as sh
from conftest import all_states, random_basket_payoff, random_market

ALPHA0 = (-815 / 1800, 310 / 1800, 630 / 1800)


def test_demo_hedge_at_start(demo_market, demo_payoff):
    weights = sh.hedge_weights(demo_market, demo_payoff, 0, sh.EMPTY_STATE)
    assert weights.alpha == pytest.approx(ALPHA0, abs=1e-12)
    assert sh.setup_cost(demo_market, weights) == pytest.approx(125 / 18, abs=1e-12)


def test_demo_hedge_after_split_move(demo_market, demo_payoff):
    state = sh.WorldState(((0, 1),))
    weights = sh.hedge_weights(demo_market, demo_payoff, 1, state)
    assert weights.alpha == pytest.approx((-108 / 225, 0.0, 4 / 9), abs=1e-12)
    assert sh.setup_cost(demo_market, weights) == pytest.approx(16 / 3, abs=1e-12)


def test_demo_next_values(demo_market, demo_payoff):
    weights = sh.hedge_weights(demo_market, demo_payoff, 0, sh.EMPTY_STATE)
    assert sh.portfolio_value_next(demo_market, weights, (0, 1)) == pytest.approx(
        10.5, abs=1e-12
    )
    assert sh.portfolio_value_next(demo_market, weights, (1, 0)) == pytest.approx(
        31 / 6, abs=1e-12
    )
    assert sh.portfolio_value_next(demo_market, weights, (0, 0)) == pytest.approx(
        0.0, abs=1e-12
    )
    assert sh.portfolio_value_next(demo_market, weights, (1, 1)) == pytest.approx(
        94 / 6, abs=1e-12
    )


def test_zero_payoff_hedges_to_zero(demo_market):
    flat = sh.PayoffSpec(
        gamma=(0.0, 0.5, 0.5), h=sh.ConvexFn.piecewise_linear((0.0,), (0.0, 0.0), 0.0)
    )
    for k in range(2):
        for state in all_states(2, k):
            weights = sh.hedge_weights(demo_market, flat, k, state)
            assert weights.alpha == pytest.approx((0.0, 0.0, 0.0), abs=1e-15)


def test_zero_weights_value_nothing(demo_market):
    weights = sh.HedgeWeights(alpha=(0.0, 0.0, 0.0), step=0, state=sh.EMPTY_STATE)
    assert sh.setup_cost(demo_market, weights) == 0.0
    assert sh.portfolio_value_next(demo_market, weights, (1, 1)) == 0.0


def test_demo_residuals(demo_market, demo_payoff):
    path = sh.WorldState(((0, 1), (0, 1)))
    assert sh.local_residual(demo_market, demo_payoff, path, 1) == pytest.approx(
        31 / 6, abs=1e-12
    )
    assert sh.local_residual(demo_market, demo_payoff, path, 2) == pytest.approx(
        12.0, abs=1e-12
    )


def test_demo_backtest(demo_market, demo_payoff):
    path = sh.WorldState(((0, 1), (0, 1)))
    trace = sh.backtest_path(demo_market, demo_payoff, path)
    assert trace.local == pytest.approx((31 / 6, 12.0), abs=1e-12)
    assert trace.accumulated == pytest.approx(103 / 6, abs=1e-12)
    assert trace.setup_costs == pytest.approx((125 / 18, 16 / 3), abs=1e-12)
    assert trace.upper_prices == pytest.approx((125 / 18, 16 / 3, 4.0), abs=1e-12)


def test_chain_paths_leave_no_residual(demo_market, demo_payoff):
    for j1 in range(3):
        for j2 in range(3):
            path = sh.WorldState((sh.chain_move(j1, 2), sh.chain_move(j2, 2)))
            trace = sh.backtest_path(demo_market, demo_payoff, path)
            assert trace.local == pytest.approx((0.0, 0.0), abs=1e-10)
            assert trace.accumulated == pytest.approx(0.0, abs=1e-10)


def test_single_asset_market_replicates():
    rng = random.Random(77)
    for _ in range(10):
        n = rng.randint(1, 4)
        market = random_market(rng, 1, n)
        payoff = random_basket_payoff(rng, market)
        for path in all_states(1, n):
            trace = sh.backtest_path(market, payoff, path)
            assert max(abs(d) for d in trace.local) <= 1e-12


def test_superhedge_domination_and_binding():
    rng = random.Random(2718)
    for _ in range(15):
        m, n = rng.randint(1, 3), rng.randint(1, 3)
        market = random_market(rng, m, n)
        payoff = random_basket_payoff(rng, market)
        for k in range(n):
            for omega in all_states(m, k):
                weights = sh.hedge_weights(market, payoff, k, omega)
                assert sh.setup_cost(market, weights) == pytest.approx(
                    sh.upper_price(market, payoff, k, omega), abs=1e-10
                )
                for move in sh.all_moves(m):
                    value = sh.portfolio_value_next(market, weights, move)
                    target = sh.upper_price(market, payoff, k + 1, omega.extend(move))
                    assert value >= target - 1e-10
                for j in range(m + 1):
                    move = sh.chain_move(j, m)
                    value = sh.portfolio_value_next(market, weights, move)
                    target = sh.upper_price(market, payoff, k + 1, omega.extend(move))
                    assert value == pytest.approx(target, abs=1e-10)


def test_hedge_reconstructs_its_targets(demo_market, demo_payoff):
    # the defining equations: portfolio value at chain move j equals the
    # successor upper price there
    for k in range(2):
        for omega in all_states(2, k):
            weights = sh.hedge_weights(demo_market, demo_payoff, k, omega)
            for j in range(3):
                move = sh.chain_move(j, 2)
                assert sh.portfolio_value_next(demo_market, weights, move) == pytest.approx(
                    sh.upper_price(demo_market, demo_payoff, k + 1, omega.extend(move)),
                    abs=1e-10,
                )


def test_random_feasible_alternatives_cost_at_least_as_much():
    rng = random.Random(4242)
    checked = 0
    for _ in range(12):
        m, n = rng.randint(1, 3), rng.randint(1, 3)
        market = random_market(rng, m, n)
        payoff = random_basket_payoff(rng, market)
        k = rng.randint(0, n - 1)
        omega = sh.WorldState(
            tuple(tuple(rng.randint(0, 1) for _ in range(m)) for _ in range(k))
        )
        best = sh.hedge_weights(market, payoff, k, omega)
        base_cost = sh.setup_cost(market, best)
        targets = {
            move: sh.upper_price(market, payoff, k + 1, omega.extend(move))
            for move in sh.all_moves(m)
        }
        for _ in range(40):
            bumped = tuple(
                a + rng.uniform(-0.05, 0.05) + (0.02 if i == 0 else 0.0) * rng.random()
                for i, a in enumerate(best.alpha)
            )
            candidate = sh.HedgeWeights(alpha=bumped, step=k, state=best.state)
            feasible = all(
                sh.portfolio_value_next(market, candidate, move) >= targets[move]
                for move in targets
            )
            if feasible:
                checked += 1
                assert sh.setup_cost(market, candidate) >= base_cost - 1e-9
    assert checked > 50  # the sampler actually exercised the certificate


def test_backtest_cache_matches_direct(demo_market, demo_payoff):
    path = sh.WorldState(((0, 1), (1, 0)))
    direct = sh.backtest_path(demo_market, demo_payoff, path)
    cached = sh.backtest_path(demo_market, demo_payoff, path, cache=True)
    assert cached == direct


def test_backtest_cache_scale_guard():
    market = sh.validate_market(
        sh.MarketSpec(
            1.0,
            1,
            21,
            (100.0, 100.0),
            (0.9,),
            (1.1,),
        )
    )
    payoff = sh.basket_call(market, (1.0,), 100.0)
    path = sh.WorldState(((1,),) * 21)
    with pytest.raises(sh.ScaleExceeded):
        sh.backtest_path(market, payoff, path, cache=True)
    # without the cache the same backtest is fine
    trace = sh.backtest_path(market, payoff, path)
    assert all(d >= 0 for d in trace.local)


def test_step_validation(demo_market, demo_payoff):
    with pytest.raises(sh.StepOutOfRange):
        sh.hedge_weights(demo_market, demo_payoff, 2, sh.EMPTY_STATE)
    with pytest.raises(sh.StepMismatch):
        sh.hedge_weights(demo_market, demo_payoff, 1, sh.EMPTY_STATE)
    with pytest.raises(sh.StepMismatch):
        sh.backtest_path(demo_market, demo_payoff, sh.WorldState(((0, 1),)))
    with pytest.raises(sh.StepOutOfRange):
        sh.local_residual(demo_market, demo_payoff, sh.WorldState(((0, 1), (0, 1))), 3)
