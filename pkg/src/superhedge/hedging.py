"""Minimum-cost super-hedging portfolios, residuals and path backtests.

The hedge at a node is the unique portfolio whose next-step value matches the
upper price at every chain-move successor.  The defining linear system is
triangular after differencing, so it is solved in closed form in O(m) per
node with no matrix algebra.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .errors import ScaleExceeded, StepMismatch, StepOutOfRange, VerificationFailure
from .market import MoveVector, OrderedMarket, WorldState, asset_price, chain_move, price_ratio
from .payoff import PayoffSpec
from .pricing import upper_price

log = logging.getLogger(__name__)

# Residuals and setup costs are certified to this absolute tolerance; small
# negative residuals inside it are rounding noise and get clamped to zero.
RESIDUAL_TOL = 1e-10

_CACHE_MAX_STEPS = 20
_CACHE_MAX_ASSETS = 3


@dataclass(frozen=True)
class HedgeWeights:
    """Portfolio positions held over [step, step+1), external asset order."""

    alpha: tuple[float, ...]
    step: int
    state: WorldState


@dataclass(frozen=True)
class ResidualTrace:
    """Full backtest record of one path: costs, bounds, residuals."""

    path: WorldState
    setup_costs: tuple[float, ...]  # k = 0..n-1
    upper_prices: tuple[float, ...]  # k = 0..n, terminal entry is the payoff
    local: tuple[float, ...]  # k = 1..n
    accumulated: float


def hedge_weights(
    market: OrderedMarket,
    payoff: PayoffSpec,
    k: int,
    omega: WorldState,
    _price=upper_price,
) -> HedgeWeights:
    """The minimum-cost super-hedge set up at (k, omega).

    Matches the upper price at all chain-move successors; by supermodularity
    of the claim that already dominates every other successor.
    """
    m, n = market.num_assets, market.num_steps
    if not 0 <= k <= n - 1:
        raise StepOutOfRange(f"hedges are set up at steps 0..{n - 1}, got {k}")
    if omega.step < k:
        raise StepMismatch(f"state has only {omega.step} moves, step {k} requested")
    prefix = omega.prefix(k)

    targets = [
        _price(market, payoff, k + 1, prefix.extend(chain_move(j, m)))
        for j in range(m + 1)
    ]
    # Difference the targets, then peel the arrowhead system asset by asset.
    diffs = [targets[0]] + [targets[j] - targets[j - 1] for j in range(1, m + 1)]
    exposures = [diffs[j] / (market.ups[j - 1] - market.downs[j - 1]) for j in range(1, m + 1)]
    cash_exposure = diffs[0] - sum(
        market.downs[j - 1] * exposures[j - 1] for j in range(1, m + 1)
    )

    alpha = [0.0] * (m + 1)
    alpha[0] = cash_exposure / (market.rate * asset_price(market, prefix, 0))
    for j in range(1, m + 1):
        alpha[market.order[j - 1]] = exposures[j - 1] / asset_price(market, prefix, j)
    return HedgeWeights(alpha=tuple(alpha), step=k, state=prefix)


def _internal_alpha(market: OrderedMarket, weights: HedgeWeights) -> list[float]:
    return [weights.alpha[0]] + [
        weights.alpha[e] for e in market.order
    ]


def setup_cost(market: OrderedMarket, weights: HedgeWeights) -> float:
    """Cost of assembling the portfolio at its own node's prices."""
    alpha = _internal_alpha(market, weights)
    return sum(
        alpha[i] * asset_price(market, weights.state, i)
        for i in range(market.num_assets + 1)
    )


def portfolio_value_next(
    market: OrderedMarket, weights: HedgeWeights, move: MoveVector
) -> float:
    """Liquidation value one step later, if the next joint move is ``move``."""
    if weights.step > market.num_steps - 1:
        raise StepOutOfRange(f"no step follows {weights.step}")
    alpha = _internal_alpha(market, weights)
    return sum(
        alpha[i] * asset_price(market, weights.state, i) * price_ratio(market, move, i)
        for i in range(market.num_assets + 1)
    )


def _clamp_residual(value: float, where: str) -> float:
    if value < -RESIDUAL_TOL:
        raise VerificationFailure(
            f"negative residual {value:.3e} at {where}; the hedge failed to dominate"
        )
    if value < 0.0:
        log.debug("clamping residual %.3e at %s", value, where)
        return 0.0
    return value


def local_residual(
    market: OrderedMarket,
    payoff: PayoffSpec,
    path: WorldState,
    k: int,
    _price=upper_price,
) -> float:
    """Surplus withdrawn at step k: previous hedge's value minus the new target.

    The target at intermediate steps is the upper price, at maturity the
    payoff itself.  Always non-negative up to rounding.
    """
    if not 1 <= k <= market.num_steps:
        raise StepOutOfRange(f"residuals exist at steps 1..{market.num_steps}, got {k}")
    if path.step < k:
        raise StepMismatch(f"path has only {path.step} moves, step {k} requested")
    weights = hedge_weights(market, payoff, k - 1, path, _price=_price)
    value = portfolio_value_next(market, weights, path.moves[k - 1])
    target = _price(market, payoff, k, path.prefix(k))
    return _clamp_residual(value - target, f"step {k}")


def backtest_path(
    market: OrderedMarket,
    payoff: PayoffSpec,
    path: WorldState,
    cache: bool = False,
) -> ResidualTrace:
    """Hedge every prefix of a full path and collect the residual stream.

    Verifies along the way that each portfolio's setup cost equals the upper
    price at its node.  With ``cache=True`` upper prices are memoized across
    the walk, which is only allowed at small tree sizes since the memo can
    grow with the whole tree.
    """
    n, m = market.num_steps, market.num_assets
    if path.step != n:
        raise StepMismatch(f"backtest needs a full path of {n} moves, got {path.step}")

    if cache:
        if n > _CACHE_MAX_STEPS or m > _CACHE_MAX_ASSETS:
            raise ScaleExceeded(
                f"tree cache supports up to {_CACHE_MAX_STEPS} steps and "
                f"{_CACHE_MAX_ASSETS} assets"
            )
        memo: dict = {}

        def price(mkt, pf, k, omega):
            key = (k, omega.prefix(k).moves)
            if key not in memo:
                memo[key] = upper_price(mkt, pf, k, omega)
            return memo[key]

    else:
        price = upper_price

    uppers = [price(market, payoff, k, path) for k in range(n + 1)]
    setups = []
    local = []
    for k in range(n):
        weights = hedge_weights(market, payoff, k, path, _price=price)
        cost = setup_cost(market, weights)
        if abs(cost - uppers[k]) > RESIDUAL_TOL:
            raise VerificationFailure(
                f"setup cost {cost!r} differs from upper price {uppers[k]!r} at step {k}"
            )
        setups.append(cost)
        value = portfolio_value_next(market, weights, path.moves[k])
        local.append(_clamp_residual(value - uppers[k + 1], f"step {k + 1}"))

    rate = market.rate
    accumulated = sum(delta * rate ** (n - k) for k, delta in enumerate(local, start=1))
    return ResidualTrace(
        path=path,
        setup_costs=tuple(setups),
        upper_prices=tuple(uppers),
        local=tuple(local),
        accumulated=accumulated,
    )
