"""Brute-force cross-checks for the closed-form price.

Everything here is deliberately independent of the pricing module: prices
are recovered by enumerating basic feasible solutions of the martingale
constraint systems and maximizing expectations over them, never via count
compression or chain-move weights.  Sizes are tiny by design.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ScaleExceeded, StepMismatch, StepOutOfRange, VerificationFailure
from .market import OrderedMarket, WorldState, all_moves, price_ratio
from .measures import DiscreteMeasure
from .payoff import PayoffSpec, check_payoff, payoff_value

_PIVOT_TOL = 1e-11
_NEG_TOL = 1e-12
_DEDUP_DECIMALS = 9
_MAX_VERTEX_ASSETS = 4
_MAX_INDUCTION_ASSETS = 3
_MAX_INDUCTION_DEPTH = 4
_MAX_FULL_ATOMS = 256
_MAX_BASES = 200_000


def _solve_augmented(aug: np.ndarray, tol: float = _PIVOT_TOL):
    """Gaussian elimination with partial pivoting on an augmented square system.

    Mutates ``aug`` in place; returns None when a pivot falls below ``tol``
    (the basis is treated as singular and skipped by callers).
    """
    size = aug.shape[0]
    for col in range(size):
        p = col + int(np.argmax(np.abs(aug[col:, col])))
        if abs(aug[p, col]) < tol:
            return None
        if p != col:
            aug[[col, p]] = aug[[p, col]]
        factors = aug[col + 1 :, col] / aug[col, col]
        aug[col + 1 :, col:] -= np.outer(factors, aug[col, col:])
    x = np.empty(size)
    for i in range(size - 1, -1, -1):
        x[i] = (aug[i, size] - aug[i, i + 1 : size] @ x[i + 1 :]) / aug[i, i]
    return x


def _solve_columns(a: np.ndarray, b: np.ndarray, combo, scratch: np.ndarray):
    """Solve the square subsystem on the chosen columns, reusing ``scratch``."""
    size = a.shape[0]
    scratch[:, :size] = a[:, combo]
    scratch[:, size] = b
    return _solve_augmented(scratch)


def _echelon(aug: np.ndarray, tol: float = _PIVOT_TOL) -> tuple[int, np.ndarray]:
    """Forward elimination of an augmented system; returns (rank, echelon form)."""
    aug = np.array(aug, dtype=float)
    rows, cols = aug.shape
    rank = 0
    for col in range(cols - 1):
        if rank == rows:
            break
        p = rank + int(np.argmax(np.abs(aug[rank:, col])))
        if abs(aug[p, col]) < tol:
            continue
        if p != rank:
            aug[[rank, p]] = aug[[p, rank]]
        factors = aug[rank + 1 :, col] / aug[rank, col]
        aug[rank + 1 :, col:] -= np.outer(factors, aug[rank, col:])
        rank += 1
    return rank, aug


@dataclass(frozen=True)
class PolytopeVertex:
    """A basic feasible solution of the single-step martingale constraints."""

    measure: DiscreteMeasure
    support: tuple[int, ...]


def single_step_vertices(market: OrderedMarket) -> list[PolytopeVertex]:
    """All vertices of the one-step martingale polytope, deduplicated.

    Solves every (m+1)-column square subsystem of {p >= 0, sum p = 1,
    E_p(indicator_i) = up_prob_i} and keeps the non-negative solutions.
    """
    m = market.num_assets
    if m > _MAX_VERTEX_ASSETS:
        raise ScaleExceeded(f"vertex enumeration supports up to {_MAX_VERTEX_ASSETS} assets")
    atoms = all_moves(m)
    a = np.ones((m + 1, len(atoms)))
    for i in range(1, m + 1):
        a[i] = [mv[i - 1] for mv in atoms]
    b = np.array([1.0, *market.up_probs])

    vertices: list[PolytopeVertex] = []
    seen: set[tuple[float, ...]] = set()
    scratch = np.empty((m + 1, m + 2))
    for combo in itertools.combinations(range(len(atoms)), m + 1):
        sol = _solve_columns(a, b, combo, scratch)
        if sol is None or (sol < -_NEG_TOL).any():
            continue
        dense = np.zeros(len(atoms))
        dense[list(combo)] = np.clip(sol, 0.0, None)
        total = dense.sum()
        if abs(total - 1.0) > 1e-9:
            continue
        dense /= total
        key = tuple(round(float(v), _DEDUP_DECIMALS) for v in dense)
        if key in seen:
            continue
        seen.add(key)
        weights = {(atoms[idx],): float(dense[idx]) for idx in range(len(atoms))}
        vertices.append(
            PolytopeVertex(measure=DiscreteMeasure(1, weights), support=combo)
        )
    return vertices


def max_single_step_expectation(f: dict, market: OrderedMarket) -> float:
    """Maximum of E_p(f) over the one-step martingale polytope.

    A linear functional attains its maximum at a vertex, so the vertex list
    is scanned directly.
    """
    best = None
    for vertex in single_step_vertices(market):
        value = sum(w * f[word[0]] for word, w in vertex.measure.weights.items())
        if best is None or value > best:
            best = value
    return best


def oracle_upper_price(
    market: OrderedMarket, payoff: PayoffSpec, k: int, omega: WorldState
) -> float:
    """Upper price by backward induction with a per-node vertex maximization.

    Shares nothing with the closed-form evaluator beyond the market data.
    """
    check_payoff(market, payoff)
    m, n = market.num_assets, market.num_steps
    if not 0 <= k <= n:
        raise StepOutOfRange(f"step {k} outside 0..{n}")
    if omega.step < k:
        raise StepMismatch(f"state has only {omega.step} moves, step {k} requested")
    if m > _MAX_INDUCTION_ASSETS or n - k > _MAX_INDUCTION_DEPTH:
        raise ScaleExceeded(
            f"backward induction supports up to {_MAX_INDUCTION_ASSETS} assets and "
            f"{_MAX_INDUCTION_DEPTH} remaining steps"
        )

    moves = all_moves(m)
    rows = [
        [vertex.measure.weight((mv,)) for mv in moves]
        for vertex in single_step_vertices(market)
    ]
    rate = market.rate

    def value(state: WorldState) -> float:
        if state.step == n:
            return payoff_value(market, payoff, state)
        children = [value(state.extend(mv)) for mv in moves]
        best = max(sum(w * c for w, c in zip(row, children)) for row in rows)
        return best / rate

    return value(omega.prefix(k))


def oracle_full_horizon_price(market: OrderedMarket, payoff: PayoffSpec) -> float:
    """Maximize the discounted expected payoff over the full-horizon polytope.

    Enumerates basic feasible solutions of the complete constraint system
    (total mass plus every conditional one-step martingale equation) with the
    same elimination kernel used for single steps.  Practical only when the
    basis count is small; raises ScaleExceeded otherwise.
    """
    check_payoff(market, payoff)
    m, n = market.num_assets, market.num_steps
    atoms = list(itertools.product(all_moves(m), repeat=n))
    count = len(atoms)
    if count > _MAX_FULL_ATOMS:
        raise ScaleExceeded(f"{count} atoms exceed the full-horizon cap of {_MAX_FULL_ATOMS}")

    rows: list[np.ndarray] = [np.ones(count)]
    rhs: list[float] = [1.0]
    for t in range(n):
        groups: dict[tuple, list[int]] = {}
        for idx, atom in enumerate(atoms):
            groups.setdefault(atom[:t], []).append(idx)
        for members in groups.values():
            for i in range(1, m + 1):
                row = np.zeros(count)
                for idx in members:
                    row[idx] = price_ratio(market, atoms[idx][t], i) - market.rate
                rows.append(row)
                rhs.append(0.0)

    aug = np.column_stack([np.array(rows), np.array(rhs)])
    rank, ech = _echelon(aug)
    if rank < ech.shape[0] and np.max(np.abs(ech[rank:, -1])) > 1e-9:
        raise VerificationFailure("martingale constraint system is inconsistent")
    bases = math.comb(count, rank)
    if bases > _MAX_BASES:
        raise ScaleExceeded(f"{bases} candidate bases exceed the cap of {_MAX_BASES}")

    a = ech[:rank, :-1]
    b = ech[:rank, -1]
    values = np.array([payoff_value(market, payoff, WorldState(atom)) for atom in atoms])
    discount = market.rate ** (-n)
    best = None
    scratch = np.empty((rank, rank + 1))
    for combo in itertools.combinations(range(count), rank):
        sol = _solve_columns(a, b, combo, scratch)
        if sol is None or (sol < -_NEG_TOL).any():
            continue
        value = discount * float(values[list(combo)] @ sol)
        if best is None or value > best:
            best = value
    if best is None:
        raise VerificationFailure("no basic feasible solution found")
    return best
