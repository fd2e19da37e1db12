"""Sticky random walk on the integer simplex: simulation, exact solves, closed forms.

A step picks a winner uniformly from the support; the winner gains
``|support| - 1`` and every other supported coordinate loses one. Zero
coordinates never move again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numba
import numpy as np

from .core import Composition, ContractError, RandomSource, RunConfig, SimSummary
from .runner import GameResult, run_config

DEFAULT_TOL = 1e-10
MAX_SWEEPS = 10**6
MAX_STATES = 10**6


@dataclass(frozen=True)
class WalkState:
    position: Composition
    t: int = 0


# -- simulation ---------------------------------------------------------------


@numba.njit(nogil=True, cache=True)
def _apply_move(x, winner):
    k = 0
    for i in range(x.shape[0]):
        if x[i] > 0:
            x[i] -= 1
            k += 1
    x[winner] += k


@numba.njit(nogil=True, cache=True)
def _draw_winner(x, gen):
    k = 0
    for i in range(x.shape[0]):
        if x[i] > 0:
            k += 1
    r = gen.integers(0, k)
    for i in range(x.shape[0]):
        if x[i] > 0:
            if r == 0:
                return i
            r -= 1
    return -1


@numba.njit(nogil=True, cache=True)
def _support_size(x):
    k = 0
    for i in range(x.shape[0]):
        if x[i] > 0:
            k += 1
    return k


@numba.njit(nogil=True, cache=True)
def _run_walk(x0, gen, cap):
    x = x0.copy()
    t = 0
    while _support_size(x) > 1:
        if t >= cap:
            return t, True
        _apply_move(x, _draw_winner(x, gen))
        t += 1
    return t, False


def apply_move(position: Composition, winner: int) -> Composition:
    """Deterministic walk update given the (0-based) winner."""
    if position.is_absorbing:
        raise ContractError(f"{position.sizes} is absorbing")
    if position[winner] == 0:
        raise ContractError(f"player {winner} is out and cannot win")
    x = np.array(position.sizes, dtype=np.int64)
    _apply_move(x, winner)
    return Composition(tuple(x.tolist()))


def walk_step(state: WalkState, rng: RandomSource) -> WalkState:
    if state.position.is_absorbing:
        raise ContractError(f"walk_step on absorbing state {state.position.sizes}")
    x = np.array(state.position.sizes, dtype=np.int64)
    _apply_move(x, _draw_winner(x, rng.gen))
    return WalkState(Composition(tuple(x.tolist())), state.t + 1)


def absorption_time(start: Composition, rng: RandomSource, round_cap: int) -> tuple[int, bool]:
    """Rounds until one coordinate holds everything, or ``(round_cap, True)``."""
    t, censored = _run_walk(np.array(start.sizes, dtype=np.int64), rng.gen, round_cap)
    return int(t), bool(censored)


def run_walk(config: RunConfig) -> SimSummary:
    if config.variant != "sticky_walk":
        raise ContractError(f"run_walk needs variant sticky_walk, got {config.variant}")
    x0 = np.array(config.start.sizes, dtype=np.int64)
    cap = config.cap

    def play(rng):
        t, c = _run_walk(x0, rng.gen, cap)
        return GameResult(int(t), bool(c))

    return run_config(config, play)


# -- closed forms ---------------------------------------------------------------


def theorem_bounds(start: Composition) -> tuple[float, float]:
    """Lower and upper bounds on the expected absorption time."""
    m = start.m
    gap = start.n**2 - sum(a * a for a in start)
    return gap / (m * (m - 1)), gap / 2


def three_player_expectation(a1: int, a2: int, a3: int) -> float:
    n = a1 + a2 + a3
    if min(a1, a2, a3) < 1 or n <= 2:
        raise ContractError(f"need a1, a2, a3 >= 1 and n > 2, got ({a1}, {a2}, {a3})")
    return a1 * a2 + a1 * a3 + a2 * a3 - 2 * a1 * a2 * a3 / (n - 2)


def sandell_tau1(a1: int, a2: int, a3: int) -> float:
    """Expected time until the first of three players is eliminated."""
    n = a1 + a2 + a3
    if n <= 2 or min(a1, a2, a3) < 0:
        raise ContractError(f"need n > 2, got ({a1}, {a2}, {a3})")
    return a1 * a2 * a3 / (n - 2)


def equal_three_player_expectation(n: int) -> float:
    return (7 * n**3 - 18 * n**2) / (27 * n - 54)


def martingale_step_identity(position: Composition) -> tuple[float, float]:
    """Exact one-step expectation of the sum of squares vs the predicted increment.

    Returns ``(E[sum A'^2], sum A^2 + |C|(|C| - 1))`` with the expectation taken
    by enumerating every equally likely winner.
    """
    if position.is_absorbing:
        raise ContractError("martingale identity needs a non-absorbing position")
    support = position.support
    k = len(support)
    total = Fraction(0)
    for v in support:
        nxt = apply_move(position, v)
        total += Fraction(sum(a * a for a in nxt), k)
    predicted = sum(a * a for a in position) + k * (k - 1)
    return float(total), float(predicted)


def termination_tail_bound(n: int, m: int, rounds: int) -> float:
    """Upper bound on P[tau > rounds]: (1 - m^-n)^floor(rounds / n)."""
    j = rounds // n
    return math.exp(j * math.log1p(-(float(m) ** -n)))


# -- exact solver -----------------------------------------------------------------


class StateSpaceTooLarge(ContractError):
    pass


class SolverDidNotConverge(RuntimeError):
    pass


@dataclass(frozen=True)
class ExactSolveReport:
    start: tuple[int, ...]
    expected_time: float
    state_count: int
    residual: float
    iterations: int
    target: str = "absorption"


@lru_cache(maxsize=None)
def partition_count(n: int, m: int) -> int:
    """Partitions of n into at most m parts."""
    if n == 0:
        return 1
    if m == 0:
        return 0
    if m > n:
        return partition_count(n, n)
    return partition_count(n, m - 1) + partition_count(n - m, m)


def _partitions(n: int, m: int, largest: int):
    if m == 0:
        if n == 0:
            yield ()
        return
    if n == 0:
        yield (0,) * m
        return
    for first in range(min(n, largest), 0, -1):
        if first * m < n:
            break
        for rest in _partitions(n - first, m - 1, first):
            yield (first,) + rest


def canonical(sizes) -> tuple[int, ...]:
    return tuple(sorted(sizes, reverse=True))


@numba.njit(nogil=True, cache=True)
def _gauss_seidel(indptr, indices, weights, tol, max_sweeps):
    ns = indptr.shape[0] - 1
    h = np.zeros(ns)
    residual = np.inf
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        for s in range(ns):
            acc = 1.0
            self_w = 0.0
            for k in range(indptr[s], indptr[s + 1]):
                j = indices[k]
                if j == s:
                    self_w += weights[k]
                else:
                    acc += weights[k] * h[j]
            h[s] = acc / (1.0 - self_w)
        residual = 0.0
        for s in range(ns):
            r = h[s] - 1.0
            for k in range(indptr[s], indptr[s + 1]):
                r -= weights[k] * h[indices[k]]
            if abs(r) > residual:
                residual = abs(r)
        if residual <= tol:
            break
    return h, residual, sweeps


@dataclass(frozen=True)
class _Solution:
    values: dict
    state_count: int
    residual: float
    iterations: int


@lru_cache(maxsize=64)
def _solve(n: int, m: int, min_support: int, tol: float, max_states: int) -> _Solution:
    count = partition_count(n, m)
    if count > max_states:
        raise StateSpaceTooLarge(
            f"{count} canonical states for n={n}, m={m} exceeds limit {max_states}"
        )
    # transient states: support at least min_support; ordered by support size, then lexicographically
    states = [
        s for s in _partitions(n, m, n) if sum(1 for a in s if a > 0) >= min_support
    ]
    states.sort(key=lambda s: (sum(1 for a in s if a > 0), s))
    index = {s: i for i, s in enumerate(states)}
    indptr = [0]
    indices: list[int] = []
    weights: list[float] = []
    for s in states:
        x = np.array(s, dtype=np.int64)
        k = int(np.count_nonzero(x))
        row: dict[int, float] = {}
        for v in range(k):
            y = x.copy()
            _apply_move(y, v)
            j = index.get(canonical(y.tolist()))
            if j is not None:
                row[j] = row.get(j, 0.0) + 1.0 / k
        for j in sorted(row):
            indices.append(j)
            weights.append(row[j])
        indptr.append(len(indices))
    if not states:
        return _Solution({}, 0, 0.0, 0)
    h, residual, sweeps = _gauss_seidel(
        np.array(indptr, dtype=np.int64),
        np.array(indices, dtype=np.int64),
        np.array(weights, dtype=np.float64),
        tol,
        MAX_SWEEPS,
    )
    if residual > tol:
        raise SolverDidNotConverge(f"residual {residual:.3g} after {sweeps} sweeps")
    return _Solution(
        {s: float(h[i]) for i, s in enumerate(states)}, len(states), float(residual), int(sweeps)
    )


def exact_expected_absorption(
    start: Composition,
    tolerance: float = DEFAULT_TOL,
    max_states: int = MAX_STATES,
    target: str = "absorption",
) -> ExactSolveReport:
    """Expected hitting time from ``start`` by Gauss-Seidel on the canonical chain.

    ``target="absorption"`` stops when one coordinate holds everything;
    ``target="first_elimination"`` stops as soon as any supported coordinate
    reaches zero.
    """
    k0 = len(start.support)
    if target == "absorption":
        min_support = 2
    elif target == "first_elimination":
        min_support = k0
    else:
        raise ContractError(f"unknown target {target!r}")
    if k0 < min_support or k0 < 2:
        return ExactSolveReport(start.sizes, 0.0, 0, 0.0, 0, target)
    sol = _solve(start.n, start.m, min_support, tolerance, max_states)
    return ExactSolveReport(
        start.sizes,
        sol.values[canonical(start.sizes)],
        sol.state_count,
        sol.residual,
        sol.iterations,
        target,
    )


def exact_table(n: int, m: int, tolerance: float = DEFAULT_TOL) -> dict:
    """Expected absorption time for every canonical start with n cards and m players."""
    sol = _solve(n, m, 2, tolerance, MAX_STATES)
    return dict(sol.values)
