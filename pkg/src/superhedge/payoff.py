"""Contingent claims: a convex function of a fixed basket of terminal prices.

A claim pays h(gamma_0 * S_0(n) + ... + gamma_m * S_m(n)) at maturity, with
h convex and all risky coefficients non-negative (the cash coefficient may be
negative, which is how a strike is encoded).  Coefficients are given in the
external asset order, the one the market spec listed the assets in.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, ParameterViolation, StepMismatch
from .market import MoveVector, OrderedMarket, WorldState, all_moves, asset_price

_SLOPE_TOL = 1e-12


@dataclass(frozen=True)
class ConvexFn:
    """A convex scalar function, evaluable on floats and numpy arrays.

    Kinds: ``call`` max(x, 0), ``put`` max(-x, 0), ``identity`` x, and ``pwl``
    a piecewise linear function described by strictly increasing knots, the
    value at the first knot, and one slope per region (len(knots) + 1 slopes,
    non-decreasing so the function is convex).  Outside the knot range the
    first/last segment extends linearly.
    """

    kind: str
    knots: tuple[float, ...] = ()
    slopes: tuple[float, ...] = ()
    base: float = 0.0
    _anchors: tuple[float, ...] = field(repr=False, default=())

    def __post_init__(self) -> None:
        if self.kind not in ("call", "put", "identity", "pwl"):
            raise ParameterViolation(f"unknown convex function kind {self.kind!r}")
        if self.kind != "pwl":
            return
        if not self.knots:
            raise ParameterViolation("piecewise linear function needs at least one knot")
        if len(self.slopes) != len(self.knots) + 1:
            raise ParameterViolation(
                f"need {len(self.knots) + 1} slopes for {len(self.knots)} knots, "
                f"got {len(self.slopes)}"
            )
        if any(b <= a for a, b in zip(self.knots, self.knots[1:])):
            raise ParameterViolation("knots must be strictly increasing")
        if any(b < a - _SLOPE_TOL for a, b in zip(self.slopes, self.slopes[1:])):
            raise ParameterViolation("slopes must be non-decreasing (convexity)")
        anchors = [self.base]
        for i in range(1, len(self.knots)):
            anchors.append(anchors[-1] + self.slopes[i] * (self.knots[i] - self.knots[i - 1]))
        object.__setattr__(self, "_anchors", tuple(anchors))

    @classmethod
    def call(cls) -> "ConvexFn":
        return cls(kind="call")

    @classmethod
    def put(cls) -> "ConvexFn":
        return cls(kind="put")

    @classmethod
    def identity(cls) -> "ConvexFn":
        return cls(kind="identity")

    @classmethod
    def piecewise_linear(
        cls,
        knots: tuple[float, ...],
        slopes: tuple[float, ...],
        value_at_first_knot: float = 0.0,
    ) -> "ConvexFn":
        return cls(
            kind="pwl", knots=tuple(knots), slopes=tuple(slopes), base=value_at_first_knot
        )

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            return self._vector(x)
        if self.kind == "call":
            return x if x > 0.0 else 0.0
        if self.kind == "put":
            return -x if x < 0.0 else 0.0
        if self.kind == "identity":
            return x
        r = bisect.bisect_right(self.knots, x)
        if r == 0:
            return self.base + self.slopes[0] * (x - self.knots[0])
        return self._anchors[r - 1] + self.slopes[r] * (x - self.knots[r - 1])

    def _vector(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "call":
            return np.maximum(x, 0.0)
        if self.kind == "put":
            return np.maximum(-x, 0.0)
        if self.kind == "identity":
            return x
        r = np.searchsorted(self.knots, x, side="right")
        idx = np.maximum(r - 1, 0)  # region 0 extends the first segment from knot 0
        knots = np.asarray(self.knots)
        anchors = np.asarray(self._anchors)
        return anchors[idx] + np.asarray(self.slopes)[r] * (x - knots[idx])


@dataclass(frozen=True)
class PayoffSpec:
    """Basket coefficients (external order, cash first) plus the convex transform."""

    gamma: tuple[float, ...]
    h: ConvexFn

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        if len(self.gamma) < 2:
            raise ParameterViolation("need a cash coefficient and at least one risky one")
        for i, g in enumerate(self.gamma[1:], start=1):
            if g < 0:
                raise ParameterViolation(f"risky coefficient {i} must be >= 0, got {g}")


def basket_call(
    market: OrderedMarket, weights: tuple[float, ...], strike: float
) -> PayoffSpec:
    """A call on a weighted basket of the risky assets with the given strike.

    The strike is encoded as a negative cash coefficient, so its present value
    scales with the cash account's initial price and the horizon.
    """
    if len(weights) != market.num_assets:
        raise DimensionMismatch(
            f"expected {market.num_assets} basket weights, got {len(weights)}"
        )
    gamma0 = -strike / (market.initials[0] * market.rate**market.num_steps)
    return PayoffSpec(gamma=(gamma0, *weights), h=ConvexFn.call())


def check_payoff(market: OrderedMarket, payoff: PayoffSpec) -> None:
    if len(payoff.gamma) != market.num_assets + 1:
        raise DimensionMismatch(
            f"payoff has {len(payoff.gamma)} coefficients, market needs "
            f"{market.num_assets + 1}"
        )


def payoff_value(market: OrderedMarket, payoff: PayoffSpec, omega: WorldState) -> float:
    """Terminal value of the claim along a full-length state of the world."""
    check_payoff(market, payoff)
    if omega.step != market.num_steps:
        raise StepMismatch(
            f"payoff needs a full path of {market.num_steps} moves, got {omega.step}"
        )
    total = payoff.gamma[0] * asset_price(market, omega, 0)
    for j in range(1, market.num_assets + 1):
        total += payoff.gamma[market.order[j - 1]] * asset_price(market, omega, j)
    return payoff.h(total)


def single_step_slice(
    market: OrderedMarket,
    payoff: PayoffSpec,
    before: WorldState,
    after: WorldState,
) -> dict[MoveVector, float]:
    """The claim as a function of one step's move, all other moves held fixed.

    Used to check that claims of this class are supermodular step by step.
    """
    if before.step + 1 + after.step != market.num_steps:
        raise StepMismatch(
            f"context has {before.step}+1+{after.step} steps, horizon is "
            f"{market.num_steps}"
        )
    return {
        mv: payoff_value(market, payoff, WorldState(before.moves + (mv,) + after.moves))
        for mv in all_moves(market.num_assets)
    }
