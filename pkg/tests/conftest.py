"""Shared fixtures: the two-step two-asset demo instance and random generators."""

from __future__ import annotations

import random

import pytest

import superhedge as sh


def make_demo_market() -> sh.OrderedMarket:
    """Two risky assets, two steps, flat rate; all golden numbers live here."""
    spec = sh.MarketSpec(
        rate_factor=1.0,
        num_assets=2,
        num_steps=2,
        initial_prices=(100.0, 100.0, 100.0),
        down_factors=(0.8, 0.9),
        up_factors=(1.1, 1.2),
    )
    return sh.validate_market(spec)


@pytest.fixture(scope="session")
def demo_market() -> sh.OrderedMarket:
    return make_demo_market()


@pytest.fixture(scope="session")
def demo_payoff(demo_market) -> sh.PayoffSpec:
    # equal-weight basket call struck at 100
    return sh.basket_call(demo_market, (0.5, 0.5), 100.0)


def random_market(rng: random.Random, m: int, n: int) -> sh.OrderedMarket:
    rate = rng.uniform(0.97, 1.06)
    downs = tuple(rate * rng.uniform(0.60, 0.97) for _ in range(m))
    ups = tuple(rate * rng.uniform(1.03, 1.45) for _ in range(m))
    prices = tuple(rng.uniform(40.0, 160.0) for _ in range(m + 1))
    spec = sh.MarketSpec(
        rate_factor=rate,
        num_assets=m,
        num_steps=n,
        initial_prices=prices,
        down_factors=downs,
        up_factors=ups,
    )
    return sh.validate_market(spec)


def random_basket_payoff(rng: random.Random, market: sh.OrderedMarket) -> sh.PayoffSpec:
    m = market.num_assets
    raw = [rng.uniform(0.1, 1.0) for _ in range(m)]
    total = sum(raw)
    weights = tuple(w / total for w in raw)
    forward = sum(
        w * s0 for w, s0 in zip(weights, market.spec.initial_prices[1:])
    ) * market.rate**market.num_steps
    strike = rng.uniform(0.6, 1.3) * forward
    return sh.basket_call(market, weights, strike)


def random_convex_payoff(rng: random.Random, market: sh.OrderedMarket) -> sh.PayoffSpec:
    """Basket with a randomly chosen convex transform (call, put, pwl, identity)."""
    m = market.num_assets
    gamma0 = rng.uniform(-1.5, 0.5)
    gammas = (gamma0, *(rng.uniform(0.0, 1.0) for _ in range(m)))
    kind = rng.choice(["call", "put", "pwl", "identity"])
    if kind == "pwl":
        knots = sorted(rng.uniform(-150.0, 150.0) for _ in range(rng.randint(1, 3)))
        for i in range(1, len(knots)):  # keep knots strictly increasing
            knots[i] = max(knots[i], knots[i - 1] + 1e-3)
        slopes = sorted(rng.uniform(-2.0, 2.0) for _ in range(len(knots) + 1))
        h = sh.ConvexFn.piecewise_linear(tuple(knots), tuple(slopes), rng.uniform(-5.0, 5.0))
    else:
        h = sh.ConvexFn(kind=kind)
    return sh.PayoffSpec(gamma=gammas, h=h)


def all_states(m: int, k: int) -> list[sh.WorldState]:
    """Every state of the world after k steps, in a fixed order."""
    import itertools

    return [
        sh.WorldState(moves) for moves in itertools.product(sh.all_moves(m), repeat=k)
    ]
