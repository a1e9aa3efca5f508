"""Upper no-arbitrage pricing and minimum-cost super-hedging for multi-asset
binomial markets, with a brute-force oracle for verification."""

from .errors import (
    DimensionMismatch,
    InputError,
    ParameterViolation,
    ScaleExceeded,
    StepMismatch,
    StepOutOfRange,
    SuperhedgeError,
    VerificationFailure,
)
from .hedging import (
    RESIDUAL_TOL,
    HedgeWeights,
    ResidualTrace,
    backtest_path,
    hedge_weights,
    local_residual,
    portfolio_value_next,
    setup_cost,
)
from .market import (
    EMPTY_STATE,
    MarketSpec,
    MoveVector,
    OrderedMarket,
    WorldState,
    all_moves,
    asset_price,
    chain_move,
    format_state,
    parse_state,
    price_ratio,
    validate_market,
)
from .measures import (
    DiscreteMeasure,
    VertexMeasure,
    expectation,
    is_martingale_measure,
    is_supermodular,
    nondegenerate_measure,
    product_vertex_measure,
    tensor,
    vertex_measure,
)
from .oracle import (
    PolytopeVertex,
    max_single_step_expectation,
    oracle_full_horizon_price,
    oracle_upper_price,
    single_step_vertices,
)
from .payoff import ConvexFn, PayoffSpec, basket_call, payoff_value, single_step_slice
from .pricing import ratio_power, upper_price, upper_price_naive

__version__ = "0.1.0"

__all__ = [
    "ConvexFn",
    "DimensionMismatch",
    "DiscreteMeasure",
    "EMPTY_STATE",
    "HedgeWeights",
    "InputError",
    "MarketSpec",
    "MoveVector",
    "OrderedMarket",
    "ParameterViolation",
    "PayoffSpec",
    "PolytopeVertex",
    "RESIDUAL_TOL",
    "ResidualTrace",
    "ScaleExceeded",
    "StepMismatch",
    "StepOutOfRange",
    "SuperhedgeError",
    "VerificationFailure",
    "VertexMeasure",
    "WorldState",
    "all_moves",
    "asset_price",
    "backtest_path",
    "basket_call",
    "chain_move",
    "expectation",
    "format_state",
    "hedge_weights",
    "is_martingale_measure",
    "is_supermodular",
    "local_residual",
    "max_single_step_expectation",
    "nondegenerate_measure",
    "oracle_full_horizon_price",
    "oracle_upper_price",
    "parse_state",
    "payoff_value",
    "portfolio_value_next",
    "price_ratio",
    "product_vertex_measure",
    "ratio_power",
    "setup_cost",
    "single_step_slice",
    "single_step_vertices",
    "tensor",
    "upper_price",
    "upper_price_naive",
    "validate_market",
    "vertex_measure",
]
