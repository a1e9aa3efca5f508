"""Discrete probability measures on joint moves and their verification checks.

These objects exist for verification and oracle work only: they materialize
measures atom by atom, which is viable up to a few thousand atoms.  The
pricing formulas never build them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import DimensionMismatch, ParameterViolation, ScaleExceeded
from .market import MoveVector, OrderedMarket, all_moves, chain_move, price_ratio

# Atoms bigger than 2^12 are refused; verification never needs them.
_MAX_BITS = 12

_NEG_CLAMP = 1e-12
_SUM_TOL = 1e-12

Word = tuple[MoveVector, ...]


@dataclass(frozen=True)
class DiscreteMeasure:
    """A probability assignment on sequences of ``dimension`` joint moves."""

    dimension: int
    weights: dict

    def __post_init__(self) -> None:
        cleaned: dict[Word, float] = {}
        move_len: int | None = None
        total = 0.0
        for word, w in self.weights.items():
            word = tuple(tuple(mv) for mv in word)
            if len(word) != self.dimension:
                raise DimensionMismatch(
                    f"atom {word} has length {len(word)}, expected {self.dimension}"
                )
            for mv in word:
                if move_len is None:
                    move_len = len(mv)
                elif len(mv) != move_len:
                    raise DimensionMismatch("atoms mix move vectors of different lengths")
            if w < -_NEG_CLAMP:
                raise ParameterViolation(f"negative weight {w} at {word}")
            w = max(w, 0.0)
            cleaned[word] = w
            total += w
        if move_len is not None and self.dimension * move_len > _MAX_BITS:
            raise ScaleExceeded(
                f"{self.dimension} steps x {move_len} assets exceeds the "
                f"{_MAX_BITS}-bit verification cap"
            )
        if abs(total - 1.0) > _SUM_TOL:
            raise ParameterViolation(f"weights sum to {total!r}, expected 1")
        object.__setattr__(self, "weights", cleaned)

    def weight(self, word: Word) -> float:
        return self.weights.get(tuple(tuple(mv) for mv in word), 0.0)


@dataclass(frozen=True)
class VertexMeasure:
    """The extremal single-step measure supported on the chain moves.

    Weight j sits on chain_move(j, m); expectations of the asset indicators
    under it reproduce the market's up probabilities.
    """

    market: OrderedMarket
    weights: tuple[float, ...]

    def support(self) -> tuple[MoveVector, ...]:
        m = self.market.num_assets
        return tuple(chain_move(j, m) for j in range(m + 1))

    def as_discrete(self) -> DiscreteMeasure:
        return DiscreteMeasure(
            dimension=1,
            weights={(mv,): w for mv, w in zip(self.support(), self.weights)},
        )


def vertex_measure(market: OrderedMarket) -> VertexMeasure:
    return VertexMeasure(market=market, weights=market.vertex_weights)


def product_vertex_measure(market: OrderedMarket, steps: int) -> DiscreteMeasure:
    """Independent product of the vertex measure over ``steps`` steps."""
    m = market.num_assets
    if steps * m > _MAX_BITS:
        raise ScaleExceeded(f"{steps} steps x {m} assets exceeds the verification cap")
    q = market.vertex_weights
    weights: dict[Word, float] = {}
    for js in itertools.product(range(m + 1), repeat=steps):
        word = tuple(chain_move(j, m) for j in js)
        w = 1.0
        for j in js:
            w *= q[j]
        weights[word] = w
    return DiscreteMeasure(dimension=steps, weights=weights)


def nondegenerate_measure(market: OrderedMarket) -> DiscreteMeasure:
    """A strictly positive single-step measure matching the up probabilities.

    Each asset rises independently with its own up probability; the weight of
    a move is the product of odds ratios of the assets that rose, normalized.
    """
    m = market.num_assets
    odds = [b / (1.0 - b) for b in market.up_probs]
    norm = 1.0
    for c in odds:
        norm *= 1.0 + c
    weights: dict[Word, float] = {}
    for mv in all_moves(m):
        w = 1.0
        for i, bit in enumerate(mv):
            if bit:
                w *= odds[i]
        weights[(mv,)] = w / norm
    return DiscreteMeasure(dimension=1, weights=weights)


def tensor(first: DiscreteMeasure, second: DiscreteMeasure) -> DiscreteMeasure:
    """Product measure on concatenated words."""
    weights: dict[Word, float] = {}
    for w1, v1 in first.weights.items():
        for w2, v2 in second.weights.items():
            weights[w1 + w2] = v1 * v2
    return DiscreteMeasure(dimension=first.dimension + second.dimension, weights=weights)


def expectation(measure: DiscreteMeasure, f) -> float:
    """Expectation of ``f(word)`` under the measure."""
    return sum(w * f(word) for word, w in measure.weights.items())


def is_martingale_measure(p: DiscreteMeasure, market: OrderedMarket, tol: float) -> bool:
    """Check the conditional one-step martingale constraints on every prefix.

    For every time t < p.dimension, every prefix of length t and every asset,
    the price-ratio-weighted mass of the prefix's one-step extensions must
    equal ``rate`` times the mass of the prefix, within ``tol``.
    """
    m = market.num_assets
    for word in p.weights:
        for mv in word:
            if len(mv) != m:
                raise DimensionMismatch(
                    f"measure moves have {len(mv)} entries, market has {m} assets"
                )
    if p.dimension > market.num_steps:
        raise DimensionMismatch(
            f"measure spans {p.dimension} steps, the market only {market.num_steps}"
        )

    r = market.rate
    for t in range(p.dimension):
        mass: dict[Word, float] = {}
        flow: dict[tuple[Word, int], float] = {}
        for word, w in p.weights.items():
            pre, mv = word[:t], word[t]
            mass[pre] = mass.get(pre, 0.0) + w
            for i in range(1, m + 1):
                key = (pre, i)
                flow[key] = flow.get(key, 0.0) + price_ratio(market, mv, i) * w
        for pre, total in mass.items():
            for i in range(1, m + 1):
                if abs(flow.get((pre, i), 0.0) - r * total) > tol:
                    return False
    return True


def join(a: MoveVector, b: MoveVector) -> MoveVector:
    return tuple(max(x, y) for x, y in zip(a, b))


def meet(a: MoveVector, b: MoveVector) -> MoveVector:
    return tuple(min(x, y) for x, y in zip(a, b))


def is_supermodular(f: dict, m: int, tol: float = 1e-12) -> bool:
    """Whether f(join) + f(meet) >= f(a) + f(b) - tol for all move pairs.

    ``f`` must be defined on all 2^m moves.
    """
    moves = all_moves(m)
    missing = [mv for mv in moves if mv not in f]
    if missing:
        raise DimensionMismatch(f"function undefined at {missing[0]} (and possibly more)")
    for idx, a in enumerate(moves):
        fa = f[a]
        for b in moves[idx + 1 :]:
            if f[join(a, b)] + f[meet(a, b)] < fa + f[b] - tol:
                return False
    return True
