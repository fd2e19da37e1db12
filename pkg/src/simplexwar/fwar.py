"""Top-card War variant where the winner is drawn in proportion to card strength.

Hands are ordered queues stored as circular buffers (one row per player), so
the hot loop runs inside numba. Alongside the hands the state carries the
per-player hand strength ``M`` and the accumulated cross-strength ``Q`` that
together form the martingale ``sum(M**2 - Q)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numba
import numpy as np

from .core import ContractError, RandomSource, RunConfig, SimSummary
from .runner import GameResult, run_config


@dataclass(frozen=True)
class StrengthFunction:
    """Card strength ``f(a, n)``; ``f(0) = 0`` marks an empty hand."""

    id: str
    f: Callable[[int, int], float]

    def table(self, n: int) -> np.ndarray:
        vals = [0] + [self.f(a, n) for a in range(1, n + 1)]
        if any(v <= 0 for v in vals[1:]):
            raise ContractError(f"strength {self.id!r} must be positive on 1..{n}")
        if all(float(v).is_integer() for v in vals):
            return np.array([int(v) for v in vals], dtype=np.int64)
        return np.array(vals, dtype=np.float64)

    def __call__(self, a: int, n: int):
        return 0 if a == 0 else self.f(a, n)


STRENGTHS: dict[str, StrengthFunction] = {
    "affine": StrengthFunction("affine", lambda a, n: a + n),
    "constant": StrengthFunction("constant", lambda a, n: 1),
    "quadratic": StrengthFunction("quadratic", lambda a, n: a * a + n * n),
}


def strength(name: str) -> StrengthFunction:
    try:
        return STRENGTHS[name]
    except KeyError:
        raise ContractError(f"unknown strength {name!r}; known: {sorted(STRENGTHS)}") from None


def register_strength(fn: StrengthFunction) -> StrengthFunction:
    STRENGTHS[fn.id] = fn
    return fn


# -- kernels ----------------------------------------------------------------------------


@numba.njit(nogil=True, cache=True)
def _select(weights, total, u):
    # smallest i with u in (x_{i-1}, x_i], x_i = cumulative weight / total
    acc = 0.0 * total
    last = -1
    for i in range(weights.shape[0]):
        if weights[i] > 0:
            acc += weights[i]
            last = i
            if u <= acc / total:
                return i
    return last


@numba.njit(nogil=True, cache=True)
def _fwar_step(cards, head, size, M, Q, ftab, gen, fa, pot, forced):
    m, n = cards.shape
    total = ftab[0] * 0
    for i in range(m):
        if size[i] > 0:
            fa[i] = ftab[cards[i, head[i]]]
        else:
            fa[i] = ftab[0]
        total += fa[i]
    for i in range(m):
        Q[i] += fa[i] * (total - fa[i])
    if forced >= 0:
        w = forced
    else:
        w = _select(fa, total, gen.random())
    k = 0
    for i in range(m):
        if size[i] > 0:
            pot[k] = cards[i, head[i]]
            head[i] = (head[i] + 1) % n
            size[i] -= 1
            M[i] -= fa[i]
            k += 1
    for j in range(k - 1, 0, -1):
        r = gen.integers(0, j + 1)
        tmp = pot[j]
        pot[j] = pot[r]
        pot[r] = tmp
    for j in range(k):
        cards[w, (head[w] + size[w]) % n] = pot[j]
        size[w] += 1
    M[w] += total
    return w


@numba.njit(nogil=True, cache=True)
def _active(size):
    k = 0
    for i in range(size.shape[0]):
        if size[i] > 0:
            k += 1
    return k


@numba.njit(nogil=True, cache=True)
def _run_fwar(cards, head, size, M, Q, ftab, gen, cap):
    m, n = cards.shape
    fa = np.zeros(m, dtype=ftab.dtype)
    pot = np.zeros(m, dtype=np.int64)
    t = 0
    while _active(size) > 1:
        if t >= cap:
            return t, True
        _fwar_step(cards, head, size, M, Q, ftab, gen, fa, pot, -1)
        t += 1
    return t, False


# -- state -------------------------------------------------------------------------------


class FwarState:
    """Ordered hands over the cards 1..n plus the M and Q trackers."""

    def __init__(self, hands: Sequence[Sequence[int]], f: StrengthFunction, n: int | None = None):
        hands = [list(map(int, h)) for h in hands]
        cards_all = sorted(c for h in hands for c in h)
        if n is None:
            n = len(cards_all)
        if cards_all != list(range(1, n + 1)):
            raise ContractError("hands must partition the cards 1..n")
        m = len(hands)
        if m < 1:
            raise ContractError("need at least one player")
        self.f = f
        self.ftab = f.table(n)
        self.cards = np.zeros((m, n), dtype=np.int64)
        self.head = np.zeros(m, dtype=np.int64)
        self.size = np.array([len(h) for h in hands], dtype=np.int64)
        for i, h in enumerate(hands):
            self.cards[i, : len(h)] = h
        self.M = np.array([self.ftab[h].sum() if h else 0 for h in hands], dtype=self.ftab.dtype)
        self.Q = np.zeros(m, dtype=self.ftab.dtype)
        self.t = 0

    @property
    def n(self) -> int:
        return self.cards.shape[1]

    @property
    def m(self) -> int:
        return self.cards.shape[0]

    @property
    def hands(self) -> tuple[tuple[int, ...], ...]:
        n = self.n
        return tuple(
            tuple(int(self.cards[i, (self.head[i] + k) % n]) for k in range(self.size[i]))
            for i in range(self.m)
        )

    @property
    def fronts(self) -> tuple[int, ...]:
        return tuple(h[0] if h else 0 for h in self.hands)

    @property
    def active(self) -> int:
        return int(np.count_nonzero(self.size))

    def copy(self) -> "FwarState":
        new = object.__new__(FwarState)
        new.f, new.ftab, new.t = self.f, self.ftab, self.t
        for k in ("cards", "head", "size", "M", "Q"):
            setattr(new, k, getattr(self, k).copy())
        return new

    def recomputed_M(self) -> np.ndarray:
        return np.array([self.ftab[list(h)].sum() if h else 0 for h in self.hands])

    def __repr__(self):
        return f"FwarState(hands={self.hands}, t={self.t}, M={self.M.tolist()}, Q={self.Q.tolist()})"


def _step_inplace(state: FwarState, gen, forced: int) -> int:
    fa = np.zeros(state.m, dtype=state.ftab.dtype)
    pot = np.zeros(state.m, dtype=np.int64)
    w = _fwar_step(
        state.cards, state.head, state.size, state.M, state.Q, state.ftab, gen, fa, pot, forced
    )
    state.t += 1
    return int(w)


def fwar_step(
    state: FwarState, rng: RandomSource, winner: int | None = None
) -> tuple[FwarState, int]:
    """Play one round; returns the new state and the (0-based) winner.

    ``winner`` forces the outcome (it must hold a card); the order in which the
    played cards go under the winner's hand is still drawn from ``rng``.
    """
    if state.active < 2:
        raise ContractError("fwar_step needs at least two nonempty hands")
    if winner is not None and state.size[winner] == 0:
        raise ContractError(f"player {winner} has no card and cannot win")
    nxt = state.copy()
    w = _step_inplace(nxt, rng.gen, -1 if winner is None else winner)
    return nxt, w


def win_probabilities(state: FwarState) -> np.ndarray:
    fa = np.array([state.ftab[a] for a in state.fronts], dtype=float)
    return fa / fa.sum()


def martingale_step_identity_f(state: FwarState) -> tuple[float, float]:
    """``(E[sum M'^2], sum M^2 + sum f_i (F - f_i))`` by enumerating the winners.

    Strengths are re-derived from the hands, not from the tracked ``M``.
    """
    if state.active < 2:
        raise ContractError("identity needs at least two nonempty hands")
    fa = [float(state.ftab[a]) for a in state.fronts]
    total = sum(fa)
    M = [float(sum(state.ftab[c] for c in h)) for h in state.hands]
    expected = 0.0
    for w, fw in enumerate(fa):
        if fw == 0:
            continue
        nxt = [Mi - fi + (total if i == w else 0.0) for i, (Mi, fi) in enumerate(zip(M, fa))]
        expected += fw / total * sum(x * x for x in nxt)
    predicted = sum(x * x for x in M) + sum(fi * (total - fi) for fi in fa)
    return expected, predicted


# -- deals and moments ------------------------------------------------------------------


def claim_deal(n: int, m: int, rng: RandomSource, f: StrengthFunction | None = None) -> FwarState:
    """Each card goes to a uniform player, then every hand is shuffled."""
    if n < 1 or m < 1:
        raise ContractError("need n >= 1 and m >= 1")
    f = f or strength("affine")
    hands: list[list[int]] = [[] for _ in range(m)]
    for card in range(1, n + 1):
        u = rng.random()
        # u in ((i-1)/m, i/m] -> player i (1-based)
        i = max(int(np.ceil(u * m)) - 1, 0)
        hands[i].append(card)
    hands = [rng.gen.permutation(np.array(h, dtype=np.int64)).tolist() for h in hands]
    return FwarState(hands, f, n)


def equal_deal(n: int, m: int, rng: RandomSource, f: StrengthFunction | None = None) -> FwarState:
    if n % m:
        raise ContractError(f"equal deal needs m | n (n={n}, m={m})")
    f = f or strength("affine")
    cards = rng.gen.permutation(np.arange(1, n + 1)).tolist()
    k = n // m
    return FwarState([cards[i * k : (i + 1) * k] for i in range(m)], f, n)


def claim_moments(n: int, m: int) -> tuple[float, float]:
    """Mean of sum(M_0) and of sum(M_0**2) under the claim deal with f(a) = a + n."""
    if n < 1 or m < 1:
        raise ContractError("need n >= 1 and m >= 1")
    mean_sum = (3 * n * n + n) / 2
    sq = (m - 1) / m * ((14 * n**3 + 9 * n**2 + n) / 6) + mean_sum**2 / m
    return mean_sum, sq


def q_sum_leading(n: int, m: int) -> float:
    """Leading term of the expected total Q at termination for f(a) = a + n."""
    return 9 * n**4 * (m - 1) / (4 * m)


def q_sum_expected(n: int, m: int) -> float:
    """Exact expected total Q at termination under the claim deal, f(a) = a + n."""
    mean_sum, sq = claim_moments(n, m)
    return mean_sum**2 - sq


def play_fwar_game(state: FwarState, rng: RandomSource, round_cap: int) -> tuple[int, bool, float]:
    """Run a game to completion in place; returns ``(rounds, censored, sum Q)``."""
    t, censored = _run_fwar(
        state.cards, state.head, state.size, state.M, state.Q, state.ftab, rng.gen, round_cap
    )
    state.t += int(t)
    return int(t), bool(censored), state.Q.sum().item()


def run_fwar(config: RunConfig, f: StrengthFunction | None = None) -> SimSummary:
    """Full games from claim or equal deals; ``extra['q_sum']`` is the mean total Q at termination."""
    if config.variant != "fwar":
        raise ContractError(f"run_fwar needs variant fwar, got {config.variant}")
    if f is None:
        f = strength(config.f_id or "affine")
    deal = claim_deal if config.deal == "claim" else equal_deal
    n, m, cap = config.n, config.m, config.cap
    f.table(n)

    def play(rng):
        state = deal(n, m, rng, f)
        t, censored, q = play_fwar_game(state, rng, cap)
        return GameResult(t, censored, {"q_sum": q})

    summary = run_config(config, play)
    if f.id == "affine" and summary.completed:
        summary.extra["q_sum_leading"] = q_sum_leading(n, m)
        if config.deal == "claim":
            summary.extra["q_sum_expected"] = q_sum_expected(n, m)
    return summary
