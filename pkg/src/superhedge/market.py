"""Market model: parameter validation, canonical ordering, states of the world.

An n-step market holds one cash account (index 0, growth factor R per step)
and m risky assets. Asset i moves by a factor of either down_factors[i-1] or
up_factors[i-1] each step. Internally the risky assets are re-sorted so that
the per-step risk-neutral up probabilities

    up_prob_i = (R - D_i) / (U_i - D_i)

are non-increasing; user-facing data (payoff coefficients, hedge weights,
state strings) stays in the order the assets were supplied in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DimensionMismatch, ParameterViolation, StepMismatch

# One step of joint price dynamics: bit i-1 is 1 when risky asset i moved up.
# Stored in internal (sorted) asset order everywhere inside the engine.
MoveVector = tuple[int, ...]


@dataclass(frozen=True)
class MarketSpec:
    """Raw market parameters, risky assets in the order supplied by the user."""

    rate_factor: float
    num_assets: int
    num_steps: int
    initial_prices: tuple[float, ...]  # cash first, then risky assets
    down_factors: tuple[float, ...]
    up_factors: tuple[float, ...]


@dataclass(frozen=True)
class OrderedMarket:
    """A validated market with assets sorted by non-increasing up probability.

    ``order[j]`` is the external (1-based) index of the risky asset sitting at
    internal position j+1.  ``up_probs`` is non-increasing and
    ``vertex_weights`` are the induced weights (1 - up_probs[0],
    successive differences, up_probs[-1]) which are non-negative and sum to 1.
    """

    spec: MarketSpec
    order: tuple[int, ...]
    up_probs: tuple[float, ...]
    vertex_weights: tuple[float, ...]
    downs: tuple[float, ...]
    ups: tuple[float, ...]
    initials: tuple[float, ...]  # cash first, then risky in internal order
    _inverse: tuple[int, ...] = field(repr=False, default=())

    @property
    def rate(self) -> float:
        return self.spec.rate_factor

    @property
    def num_assets(self) -> int:
        return self.spec.num_assets

    @property
    def num_steps(self) -> int:
        return self.spec.num_steps

    def internal_position(self, external_index: int) -> int:
        """Internal 1-based position of the risky asset with the given external index."""
        return self._inverse[external_index - 1]

    def to_internal_bits(self, external_bits: tuple[int, ...]) -> MoveVector:
        """Reorder a user-supplied move (external asset order) into internal order."""
        if len(external_bits) != self.num_assets:
            raise DimensionMismatch(
                f"move has {len(external_bits)} entries, expected {self.num_assets}"
            )
        return tuple(external_bits[e - 1] for e in self.order)

    def to_external_bits(self, move: MoveVector) -> tuple[int, ...]:
        bits = [0] * self.num_assets
        for j, e in enumerate(self.order):
            bits[e - 1] = move[j]
        return tuple(bits)


@dataclass(frozen=True)
class WorldState:
    """State of the world after ``step`` moves, each in internal asset order."""

    moves: tuple[MoveVector, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "moves", tuple(tuple(mv) for mv in self.moves))
        for mv in self.moves:
            if any(bit not in (0, 1) for bit in mv):
                raise ParameterViolation(f"move entries must be 0 or 1, got {mv}")
        if len({len(mv) for mv in self.moves}) > 1:
            raise DimensionMismatch("all moves in a state must have equal length")

    @property
    def step(self) -> int:
        return len(self.moves)

    def prefix(self, k: int) -> "WorldState":
        return WorldState(self.moves[:k])

    def extend(self, move: MoveVector) -> "WorldState":
        return WorldState(self.moves + (tuple(move),))


EMPTY_STATE = WorldState(())


def validate_market(spec: MarketSpec) -> OrderedMarket:
    """Check no-arbitrage bounds and build the canonically ordered market.

    Requires 0 < D_i < R < U_i and positive initial prices.  The sort by
    up probability is stable, so assets with equal probabilities keep their
    external relative order and results are deterministic.

    Raises ParameterViolation for arbitrage-admitting or degenerate input.
    """
    m, n = spec.num_assets, spec.num_steps
    r = spec.rate_factor
    if m < 1:
        raise ParameterViolation(f"need at least one risky asset, got {m}")
    if n < 1:
        raise ParameterViolation(f"need at least one step, got {n}")
    if len(spec.initial_prices) != m + 1:
        raise DimensionMismatch(
            f"expected {m + 1} initial prices (cash first), got {len(spec.initial_prices)}"
        )
    if len(spec.down_factors) != m or len(spec.up_factors) != m:
        raise DimensionMismatch("down/up factor lists must have one entry per risky asset")
    for i, s0 in enumerate(spec.initial_prices):
        if not s0 > 0:
            raise ParameterViolation(f"initial price of asset {i} must be positive, got {s0}")
    for i in range(m):
        d, u = spec.down_factors[i], spec.up_factors[i]
        if not 0 < d < r < u:
            raise ParameterViolation(
                f"asset {i + 1} needs 0 < down < rate < up, got down={d}, rate={r}, up={u}"
            )

    probs = [
        (r - spec.down_factors[i]) / (spec.up_factors[i] - spec.down_factors[i])
        for i in range(m)
    ]
    order = tuple(sorted(range(1, m + 1), key=lambda e: -probs[e - 1]))
    b = tuple(probs[e - 1] for e in order)
    weights = [1.0 - b[0]]
    weights += [b[j] - b[j + 1] for j in range(m - 1)]
    weights.append(b[m - 1])

    inverse = [0] * m
    for j, e in enumerate(order):
        inverse[e - 1] = j + 1
    return OrderedMarket(
        spec=spec,
        order=order,
        up_probs=b,
        vertex_weights=tuple(weights),
        downs=tuple(spec.down_factors[e - 1] for e in order),
        ups=tuple(spec.up_factors[e - 1] for e in order),
        initials=(spec.initial_prices[0],)
        + tuple(spec.initial_prices[e] for e in order),
        _inverse=tuple(inverse),
    )


def price_ratio(market: OrderedMarket, move: MoveVector, i: int) -> float:
    """One-step growth factor of asset i (internal index, 0 = cash) under ``move``."""
    if i == 0:
        return market.rate
    return market.ups[i - 1] if move[i - 1] else market.downs[i - 1]


def asset_price(market: OrderedMarket, omega: WorldState, i: int) -> float:
    """Price of asset i (internal index) at time omega.step along ``omega``."""
    if omega.step > market.num_steps:
        raise StepMismatch(
            f"state has {omega.step} moves but the horizon is {market.num_steps}"
        )
    price = market.initials[i]
    for move in omega.moves:
        price *= price_ratio(market, move, i)
    return price


def chain_move(j: int, m: int) -> MoveVector:
    """The move where the first j assets (internal order) rise and the rest fall."""
    if not 0 <= j <= m:
        raise ParameterViolation(f"chain index must lie in 0..{m}, got {j}")
    return (1,) * j + (0,) * (m - j)


def all_moves(m: int) -> list[MoveVector]:
    """All 2^m single-step moves, in binary counting order."""
    return [tuple((v >> (m - 1 - i)) & 1 for i in range(m)) for v in range(1 << m)]


def parse_state(market: OrderedMarket, text: str) -> WorldState:
    """Parse a comma-separated path of '0'/'1' strings in external asset order."""
    text = text.strip()
    if not text:
        return EMPTY_STATE
    moves = []
    for token in text.split(","):
        token = token.strip()
        if len(token) != market.num_assets or any(c not in "01" for c in token):
            raise ParameterViolation(
                f"move {token!r} must be {market.num_assets} characters of 0/1"
            )
        moves.append(market.to_internal_bits(tuple(int(c) for c in token)))
    return WorldState(tuple(moves))


def format_state(market: OrderedMarket, omega: WorldState) -> str:
    """Inverse of :func:`parse_state`, emitting external asset order."""
    return ",".join(
        "".join(str(bit) for bit in market.to_external_bits(move)) for move in omega.moves
    )
