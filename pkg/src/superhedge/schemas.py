"""Pydantic models for the service wire format and the JSON file formats.

The same models validate request bodies and the market/payoff files the CLI
reads, so there is exactly one parsing path into the core types.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from .errors import InputError
from .market import MarketSpec, OrderedMarket, validate_market
from .payoff import ConvexFn, PayoffSpec, basket_call


class AssetIn(BaseModel):
    name: str = ""
    s0: float
    down: float
    up: float


class MarketIn(BaseModel):
    """Market file format; assets listed in external order."""

    rate_factor: float
    num_steps: int
    cash_s0: float
    assets: list[AssetIn] = Field(min_length=1)

    def to_market(self) -> OrderedMarket:
        spec = MarketSpec(
            rate_factor=self.rate_factor,
            num_assets=len(self.assets),
            num_steps=self.num_steps,
            initial_prices=(self.cash_s0, *(a.s0 for a in self.assets)),
            down_factors=tuple(a.down for a in self.assets),
            up_factors=tuple(a.up for a in self.assets),
        )
        return validate_market(spec)


class ConvexFnIn(BaseModel):
    type: Literal["call", "put", "identity", "pwl"]
    knots: Optional[list[float]] = None
    slopes: Optional[list[float]] = None
    value_at_first_knot: float = 0.0

    def to_fn(self) -> ConvexFn:
        if self.type == "pwl":
            if self.knots is None or self.slopes is None:
                raise InputError("pwl functions need both knots and slopes")
            return ConvexFn.piecewise_linear(
                tuple(self.knots), tuple(self.slopes), self.value_at_first_knot
            )
        return ConvexFn(kind=self.type)


class BasketCallIn(BaseModel):
    weights: list[float]
    strike: float


class PayoffIn(BaseModel):
    """Payoff file format: explicit coefficients plus transform, or basket sugar."""

    gamma: Optional[list[float]] = None
    h: Optional[ConvexFnIn] = None
    basket_call: Optional[BasketCallIn] = None

    @model_validator(mode="after")
    def _one_form(self) -> "PayoffIn":
        explicit = self.gamma is not None and self.h is not None
        sugar = self.basket_call is not None
        if explicit == sugar:
            raise ValueError("give either gamma plus h, or basket_call, not both")
        return self

    def to_payoff(self, market: OrderedMarket) -> PayoffSpec:
        if self.basket_call is not None:
            return basket_call(
                market, tuple(self.basket_call.weights), self.basket_call.strike
            )
        return PayoffSpec(gamma=tuple(self.gamma), h=self.h.to_fn())


class PriceRequest(BaseModel):
    market: MarketIn
    payoff: PayoffIn
    step: Optional[int] = None
    state: str = ""
    mode: Literal["compressed", "naive"] = "compressed"


class PriceResponse(BaseModel):
    step: int
    state: str
    upper_price: float


class HedgeRequest(BaseModel):
    market: MarketIn
    payoff: PayoffIn
    step: Optional[int] = None
    state: str = ""


class HedgeResponse(BaseModel):
    step: int
    state: str
    alpha: list[float]
    setup_cost: float
    next_values: dict[str, float]


class BacktestRequest(BaseModel):
    market: MarketIn
    payoff: PayoffIn
    state: str


class BacktestRow(BaseModel):
    step: int
    state: str
    setup_cost: Optional[float] = None
    upper_price: float
    delta: Optional[float] = None
    delta_discounted: Optional[float] = None


class BacktestResponse(BaseModel):
    rows: list[BacktestRow]
    accumulated: float


class VerifyRequest(BaseModel):
    market: MarketIn
    payoff: PayoffIn
    tol: float = 1e-10


class VerifyRow(BaseModel):
    step: int
    state: str
    upper_price: float
    oracle: float
    deviation: float


class VerifyResponse(BaseModel):
    rows: list[VerifyRow]
    max_abs_deviation: float
    tolerance: float
    passed: bool
