"""Closed-form evaluation of the upper no-arbitrage price.

The upper price at time k discounts a weighted sum of the payoff transform
over all length n-k words of chain moves.  Words sharing per-index counts
contribute identical terms, so the default evaluator sums over count
multisets with multinomial weights: C(n-k+m, m) terms instead of (m+1)^(n-k).
A literal word-by-word evaluator is kept as a reference.

Large sums are evaluated with numpy over fixed-size row chunks, reduced in
chunk order, which keeps results bit-identical regardless of threading.
Setting SUPERHEDGE_THREADS > 1 fans the chunks out to a thread pool.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import (
    DimensionMismatch,
    ParameterViolation,
    ScaleExceeded,
    StepMismatch,
    StepOutOfRange,
)
from .market import OrderedMarket, WorldState, asset_price
from .payoff import PayoffSpec, check_payoff, payoff_value

_NAIVE_LIMIT = 10_000_000
# Below this many count terms the plain Python evaluator beats numpy setup cost.
_PURE_LIMIT = 512
# Multinomial weights stay well inside float range up to this horizon; beyond
# it they are assembled in log space.
_LOG_HORIZON = 300
_CHUNK = 1 << 16


def _threads() -> int:
    raw = os.environ.get("SUPERHEDGE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _node(market: OrderedMarket, payoff: PayoffSpec, k: int, omega: WorldState):
    """Validate a (k, state) node and return the per-asset basket coefficients.

    Returns (cash_coeff, risky_coeffs) where cash_coeff multiplies the cash
    growth and risky_coeffs[i-1] multiplies asset i's ratio products, both in
    internal order and already scaled by the prices at time k.
    """
    check_payoff(market, payoff)
    if not 0 <= k <= market.num_steps:
        raise StepOutOfRange(f"step {k} outside 0..{market.num_steps}")
    if omega.step < k:
        raise StepMismatch(f"state has only {omega.step} moves, step {k} requested")
    if omega.moves and len(omega.moves[0]) != market.num_assets:
        raise DimensionMismatch(
            f"state moves have {len(omega.moves[0])} entries, market has "
            f"{market.num_assets} assets"
        )
    prefix = omega.prefix(k)
    cash = payoff.gamma[0] * asset_price(market, prefix, 0)
    risky = tuple(
        payoff.gamma[market.order[j - 1]] * asset_price(market, prefix, j)
        for j in range(1, market.num_assets + 1)
    )
    return prefix, cash, risky


def ratio_power(market: OrderedMarket, i: int, counts: tuple[int, ...]) -> float:
    """Product of asset i's one-step ratios over any word with these counts.

    ``counts[j]`` is how often chain move j occurs; asset i (internal order)
    rises on chain moves j >= i and falls otherwise, so only the counts'
    suffix sum matters.  Asset 0 is cash and grows by the rate each step.
    """
    m = market.num_assets
    if len(counts) != m + 1:
        raise DimensionMismatch(f"expected {m + 1} counts, got {len(counts)}")
    if any(c < 0 for c in counts):
        raise ParameterViolation(f"counts must be non-negative, got {counts}")
    t = sum(counts)
    if i == 0:
        return market.rate**t
    rises = sum(counts[i:])
    return market.ups[i - 1] ** rises * market.downs[i - 1] ** (t - rises)


def _iter_weighted_counts(q: tuple[float, ...], horizon: int):
    """Yield (counts, weight) lexicographically, weight = multinomial * prod q^c.

    The binomial factors are accumulated incrementally in floating point,
    which is exact enough for the horizons this path handles.
    """
    slots = len(q)
    counts = [0] * slots

    def rec(slot: int, remaining: int, weight: float):
        if slot == slots - 1:
            counts[slot] = remaining
            yield tuple(counts), weight * q[slot] ** remaining
            return
        binom = 1.0
        qpow = 1.0
        for c in range(remaining + 1):
            counts[slot] = c
            yield from rec(slot + 1, remaining - c, weight * binom * qpow)
            binom = binom * (remaining - c) / (c + 1)
            qpow *= q[slot]

    yield from rec(0, horizon, 1.0)


def _power_table(up: float, down: float, t: int) -> list[float]:
    """table[v] = up^v * down^(t-v), built by exact cumulative products."""
    ups = [1.0] * (t + 1)
    downs = [1.0] * (t + 1)
    for e in range(1, t + 1):
        ups[e] = ups[e - 1] * up
        downs[e] = downs[e - 1] * down
    return [ups[v] * downs[t - v] for v in range(t + 1)]


def _pure_sum(market, h, cash, risky, t: int) -> float:
    m = market.num_assets
    q = market.vertex_weights
    tables = [_power_table(market.ups[i], market.downs[i], t) for i in range(m)]
    base = cash * market.rate**t

    total = 0.0
    comp = 0.0  # Kahan compensation
    for counts, weight in _iter_weighted_counts(q, t):
        x = base
        rises = 0
        for i in range(m, 0, -1):
            rises += counts[i]
            x += risky[i - 1] * tables[i - 1][rises]
        term = weight * h(x)
        y = term - comp
        new_total = total + y
        comp = (new_total - total) - y
        total = new_total
    return total


def _rise_matrix(m: int, t: int) -> np.ndarray:
    """All non-increasing tuples (rises_1..rises_m) in 0..t, one per row.

    Row order is deterministic: lexicographic in the rise counts.
    """
    u = np.arange(t + 1, dtype=np.int32).reshape(-1, 1)
    for _ in range(m - 1):
        reps = u[:, -1].astype(np.int64) + 1
        idx = np.repeat(np.arange(u.shape[0], dtype=np.int64), reps)
        starts = np.cumsum(reps) - reps
        pos = (np.arange(reps.sum(), dtype=np.int64) - np.repeat(starts, reps)).astype(
            np.int32
        )
        u = np.column_stack([u[idx], pos])
    return u


def _vector_sum(market, h, cash, risky, t: int) -> float:
    m = market.num_assets
    q = np.asarray(market.vertex_weights)
    rises = _rise_matrix(m, t)
    base = cash * market.rate**t
    ptab = np.array([_power_table(market.ups[i], market.downs[i], t) for i in range(m)])

    if t <= _LOG_HORIZON:
        binom = np.zeros((t + 1, t + 1))
        binom[:, 0] = 1.0
        for a in range(1, t + 1):
            binom[a, 1 : a + 1] = binom[a - 1, :a] + binom[a - 1, 1 : a + 1]
        qpow = np.ones((m + 1, t + 1))
        for j in range(m + 1):
            qpow[j, 1:] = np.cumprod(np.full(t, q[j]))
        logfact = lq = None
    else:
        binom = qpow = None
        logfact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, t + 1)))))
        with np.errstate(divide="ignore"):
            lq = np.log(q)

    def weight_of(chunk: np.ndarray) -> np.ndarray:
        prev = chunk[:, 0]
        if binom is not None:
            w = binom[t, prev] * qpow[0, t - prev]
            for j in range(1, m):
                cur = chunk[:, j]
                w = w * binom[prev, cur] * qpow[j, prev - cur]
                prev = cur
            return w * qpow[m, prev]
        counts = [t - prev]
        for j in range(1, m):
            counts.append(prev - chunk[:, j])
            prev = chunk[:, j]
        counts.append(prev)
        logw = np.full(chunk.shape[0], logfact[t])
        with np.errstate(invalid="ignore"):  # 0 * log(0) is masked to 0 below
            for j, c in enumerate(counts):
                logw -= logfact[c]
                logw += np.where(c > 0, c * lq[j], 0.0)
        return np.exp(logw)

    def eval_chunk(bounds: tuple[int, int]) -> float:
        lo, hi = bounds
        chunk = rises[lo:hi]
        x = np.full(chunk.shape[0], base)
        for i in range(m):
            x += risky[i] * ptab[i, chunk[:, i]]
        return float(np.sum(weight_of(chunk) * h(x)))

    spans = [(lo, min(lo + _CHUNK, rises.shape[0])) for lo in range(0, rises.shape[0], _CHUNK)]
    workers = _threads()
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(eval_chunk, spans))
    else:
        partials = [eval_chunk(span) for span in spans]
    return sum(partials)


def upper_price(
    market: OrderedMarket, payoff: PayoffSpec, k: int, omega: WorldState
) -> float:
    """Upper bound of the no-arbitrage price interval at (k, omega).

    Only the first k moves of ``omega`` are read.  At k equal to the horizon
    this is the terminal payoff itself.
    """
    prefix, cash, risky = _node(market, payoff, k, omega)
    n = market.num_steps
    if k == n:
        return payoff_value(market, payoff, prefix)
    t = n - k
    terms = math.comb(t + market.num_assets, market.num_assets)
    if terms < _PURE_LIMIT:
        total = _pure_sum(market, payoff.h, cash, risky, t)
    else:
        total = _vector_sum(market, payoff.h, cash, risky, t)
    return market.rate ** (k - n) * total


def upper_price_naive(
    market: OrderedMarket, payoff: PayoffSpec, k: int, omega: WorldState
) -> float:
    """Reference evaluator: literal sum over every word of chain moves."""
    prefix, cash, risky = _node(market, payoff, k, omega)
    m, n = market.num_assets, market.num_steps
    if k == n:
        return payoff_value(market, payoff, prefix)
    t = n - k
    if (m + 1) ** t > _NAIVE_LIMIT:
        raise ScaleExceeded(f"naive evaluation needs {(m + 1) ** t} terms")

    q = market.vertex_weights
    # ratio[i][j]: asset i's one-step factor under chain move j
    ratio = [[market.rate] * (m + 1)]
    for i in range(1, m + 1):
        ratio.append(
            [market.ups[i - 1] if i <= j else market.downs[i - 1] for j in range(m + 1)]
        )
    base = cash * market.rate**t
    h = payoff.h

    def terms():
        for word in itertools.product(range(m + 1), repeat=t):
            w = 1.0
            for j in word:
                w *= q[j]
            x = base
            for i in range(1, m + 1):
                p = risky[i - 1]
                row = ratio[i]
                for j in word:
                    p *= row[j]
                x += p
            yield w * h(x)

    return market.rate ** (k - n) * math.fsum(terms())
