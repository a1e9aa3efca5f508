"""FastAPI service exposing pricing, hedging, backtests and verification."""

from __future__ import annotations

import itertools

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .errors import InputError, ScaleExceeded, StepOutOfRange, SuperhedgeError
from .hedging import backtest_path, hedge_weights, portfolio_value_next, setup_cost
from .market import (
    OrderedMarket,
    WorldState,
    all_moves,
    chain_move,
    format_state,
    parse_state,
)
from .oracle import oracle_upper_price
from .pricing import upper_price, upper_price_naive
from .schemas import (
    BacktestRequest,
    BacktestResponse,
    BacktestRow,
    HedgeRequest,
    HedgeResponse,
    PriceRequest,
    PriceResponse,
    VerifyRequest,
    VerifyResponse,
    VerifyRow,
)

# Verification sweeps the whole tree, so it is capped at oracle-friendly sizes.
_VERIFY_MAX_ASSETS = 3
_VERIFY_MAX_STEPS = 4
# Hedge responses list every successor move up to this many assets, then only
# the chain moves.
_FULL_FAN_OUT_ASSETS = 6

app = FastAPI(title="superhedge", version=__version__)


@app.exception_handler(SuperhedgeError)
async def _domain_error(_request: Request, exc: SuperhedgeError) -> JSONResponse:
    return JSONResponse(
        status_code=422,
        content={"detail": str(exc), "error": type(exc).__name__},
    )


def _resolve_node(market: OrderedMarket, state_text: str, step: int | None):
    omega = parse_state(market, state_text)
    k = omega.step if step is None else step
    if k > omega.step:
        raise InputError(
            f"step {k} requested but the state only describes {omega.step} moves"
        )
    return omega.prefix(k), k


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/price", response_model=PriceResponse)
def price(req: PriceRequest) -> PriceResponse:
    market = req.market.to_market()
    payoff = req.payoff.to_payoff(market)
    omega, k = _resolve_node(market, req.state, req.step)
    evaluate = upper_price if req.mode == "compressed" else upper_price_naive
    return PriceResponse(
        step=k, state=format_state(market, omega), upper_price=evaluate(market, payoff, k, omega)
    )


@app.post("/hedge", response_model=HedgeResponse)
def hedge(req: HedgeRequest) -> HedgeResponse:
    market = req.market.to_market()
    payoff = req.payoff.to_payoff(market)
    omega, k = _resolve_node(market, req.state, req.step)
    if k >= market.num_steps:
        raise StepOutOfRange(
            f"hedges are set up before maturity, step {k} is not"
        )
    weights = hedge_weights(market, payoff, k, omega)
    m = market.num_assets
    if m <= _FULL_FAN_OUT_ASSETS:
        successors = all_moves(m)
    else:
        successors = [chain_move(j, m) for j in range(m + 1)]
    next_values = {
        "".join(str(b) for b in market.to_external_bits(mv)): portfolio_value_next(
            market, weights, mv
        )
        for mv in successors
    }
    return HedgeResponse(
        step=k,
        state=format_state(market, omega),
        alpha=list(weights.alpha),
        setup_cost=setup_cost(market, weights),
        next_values=next_values,
    )


@app.post("/backtest", response_model=BacktestResponse)
def backtest(req: BacktestRequest) -> BacktestResponse:
    market = req.market.to_market()
    payoff = req.payoff.to_payoff(market)
    path = parse_state(market, req.state)
    trace = backtest_path(market, payoff, path)
    n = market.num_steps
    rate = market.rate
    rows = [
        BacktestRow(
            step=0,
            state="",
            setup_cost=trace.setup_costs[0],
            upper_price=trace.upper_prices[0],
        )
    ]
    for k in range(1, n + 1):
        rows.append(
            BacktestRow(
                step=k,
                state=format_state(market, path.prefix(k)),
                setup_cost=trace.setup_costs[k] if k < n else None,
                upper_price=trace.upper_prices[k],
                delta=trace.local[k - 1],
                delta_discounted=trace.local[k - 1] * rate ** (n - k),
            )
        )
    return BacktestResponse(rows=rows, accumulated=trace.accumulated)


@app.post("/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest) -> VerifyResponse:
    market = req.market.to_market()
    payoff = req.payoff.to_payoff(market)
    m, n = market.num_assets, market.num_steps
    if m > _VERIFY_MAX_ASSETS or n > _VERIFY_MAX_STEPS:
        raise ScaleExceeded(
            f"verification sweeps every node and supports up to "
            f"{_VERIFY_MAX_ASSETS} assets and {_VERIFY_MAX_STEPS} steps"
        )
    rows = []
    worst = 0.0
    moves = all_moves(m)
    for k in range(n):
        for prefix in itertools.product(moves, repeat=k):
            omega = WorldState(prefix)
            closed = upper_price(market, payoff, k, omega)
            brute = oracle_upper_price(market, payoff, k, omega)
            deviation = abs(closed - brute)
            worst = max(worst, deviation)
            rows.append(
                VerifyRow(
                    step=k,
                    state=format_state(market, omega),
                    upper_price=closed,
                    oracle=brute,
                    deviation=deviation,
                )
            )
    return VerifyResponse(
        rows=rows,
        max_abs_deviation=worst,
        tolerance=req.tol,
        passed=worst <= req.tol,
    )
