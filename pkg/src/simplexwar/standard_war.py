"""The real card game: 52 cards, m players, highest face-up card takes the pot.

Ties go to war: each tied player stakes one face-down and one face-up card
and the new face-up cards are compared among the tied players, repeating
until one is left. A tied player holding fewer than two cards is eliminated
on the spot and whatever it still holds joins the pot. If every tied player
busts at once, the pot goes to a uniformly random player who still holds
cards, or, if nobody does, to a uniformly random busted player. A won pot
goes under the winner's hand in uniformly random order. Aces are high (14),
suits are ignored.
"""

from __future__ import annotations

from typing import Sequence

import numba
import numpy as np

from .core import ContractError, RandomSource, RunConfig, SimSummary
from .runner import GameResult, run_config

DECK = tuple(r for r in range(2, 15) for _ in range(4))
DEFAULT_ROUND_CAP = 10**6


class ConservationError(RuntimeError):
    pass


@numba.njit(nogil=True, cache=True)
def _pop(cards, head, size, i):
    c = cards[i, head[i]]
    head[i] = (head[i] + 1) % cards.shape[1]
    size[i] -= 1
    return c


@numba.njit(nogil=True, cache=True)
def _push(cards, head, size, i, c):
    cards[i, (head[i] + size[i]) % cards.shape[1]] = c
    size[i] += 1


@numba.njit(nogil=True, cache=True)
def _play_round(cards, head, size, gen, pot, eliminated):
    """One round in place; returns the winner. ``eliminated[i]`` is set for busted players."""
    m = cards.shape[0]
    had = np.zeros(m, dtype=np.bool_)
    part = np.empty(m, dtype=np.int64)
    up = np.empty(m, dtype=np.int64)
    tied = np.empty(m, dtype=np.int64)
    k = 0
    for i in range(m):
        eliminated[i] = False
        if size[i] > 0:
            had[i] = True
            part[k] = i
            k += 1
    npot = 0
    for j in range(k):
        c = _pop(cards, head, size, part[j])
        pot[npot] = c
        npot += 1
        up[j] = c
    winner = -1
    while winner < 0:
        best = -1
        for j in range(k):
            if up[j] > best:
                best = up[j]
        nt = 0
        for j in range(k):
            if up[j] == best:
                tied[nt] = part[j]
                nt += 1
        if nt == 1:
            winner = tied[0]
            break
        k = 0
        for j in range(nt):
            i = tied[j]
            if size[i] >= 2:
                part[k] = i
                k += 1
            else:
                while size[i] > 0:
                    pot[npot] = _pop(cards, head, size, i)
                    npot += 1
        if k == 1:
            winner = part[0]
        elif k == 0:
            n_left = 0
            for i in range(m):
                if size[i] > 0:
                    n_left += 1
            if n_left > 0:
                r = gen.integers(0, n_left)
                for i in range(m):
                    if size[i] > 0:
                        if r == 0:
                            winner = i
                            break
                        r -= 1
            else:
                winner = tied[gen.integers(0, nt)]
        else:
            for j in range(k):
                i = part[j]
                pot[npot] = _pop(cards, head, size, i)
                npot += 1
                c = _pop(cards, head, size, i)
                pot[npot] = c
                npot += 1
                up[j] = c
    for j in range(npot - 1, 0, -1):
        r = gen.integers(0, j + 1)
        tmp = pot[j]
        pot[j] = pot[r]
        pot[r] = tmp
    for j in range(npot):
        _push(cards, head, size, winner, pot[j])
    for i in range(m):
        eliminated[i] = had[i] and size[i] == 0
    return winner


@numba.njit(nogil=True, cache=True)
def _play_game(cards, head, size, gen, cap):
    """Returns (rounds, winner, status); status 0 done, 1 censored, 2 conservation broken."""
    m, total = cards.shape
    pot = np.empty(total, dtype=np.int64)
    elim = np.zeros(m, dtype=np.bool_)
    t = 0
    while True:
        alive = 0
        last = -1
        held = 0
        for i in range(m):
            held += size[i]
            if size[i] > 0:
                alive += 1
                last = i
        if held != total:
            return t, -1, 2
        if alive <= 1:
            return t, last, 0
        if t >= cap:
            return t, -1, 1
        _play_round(cards, head, size, gen, pot, elim)
        t += 1


class WarTable:
    """Ordered hands as circular buffers sized to the whole deck."""

    def __init__(self, hands: Sequence[Sequence[int]]):
        hands = [list(map(int, h)) for h in hands]
        self.total = sum(len(h) for h in hands)
        m = len(hands)
        if m < 2:
            raise ContractError("need at least two players")
        self.cards = np.zeros((m, self.total), dtype=np.int64)
        self.head = np.zeros(m, dtype=np.int64)
        self.size = np.array([len(h) for h in hands], dtype=np.int64)
        for i, h in enumerate(hands):
            self.cards[i, : len(h)] = h

    @property
    def m(self) -> int:
        return self.cards.shape[0]

    @property
    def hands(self) -> tuple[tuple[int, ...], ...]:
        t = self.total
        return tuple(
            tuple(int(self.cards[i, (self.head[i] + k) % t]) for k in range(self.size[i]))
            for i in range(self.m)
        )

    @property
    def active(self) -> frozenset[int]:
        return frozenset(int(i) for i in np.flatnonzero(self.size))

    @property
    def pot(self) -> tuple[int, ...]:
        # rounds are resolved atomically, so the pot is always empty between calls
        return ()

    def copy(self) -> "WarTable":
        new = object.__new__(WarTable)
        new.total = self.total
        new.cards, new.head, new.size = self.cards.copy(), self.head.copy(), self.size.copy()
        return new

    def __repr__(self):
        return f"WarTable(hands={self.hands})"


def deal(m: int, rng: RandomSource, allow_uneven: bool = True) -> WarTable:
    """Shuffle the deck and deal round-robin; extra cards land on the lowest indices."""
    if not 2 <= m <= 52:
        raise ContractError(f"player count must be in 2..52, got {m}")
    if 52 % m and not allow_uneven:
        raise ContractError(f"{m} does not divide 52 and uneven deals are disabled")
    cards = rng.gen.permutation(np.array(DECK, dtype=np.int64)).tolist()
    return WarTable([cards[i::m] for i in range(m)])


def play_round(table: WarTable, rng: RandomSource) -> tuple[WarTable, frozenset[int]]:
    if len(table.active) < 2:
        raise ContractError("play_round needs at least two active players")
    nxt = table.copy()
    pot = np.empty(nxt.total, dtype=np.int64)
    elim = np.zeros(nxt.m, dtype=np.bool_)
    _play_round(nxt.cards, nxt.head, nxt.size, rng.gen, pot, elim)
    if int(nxt.size.sum()) != table.total:
        raise ConservationError(f"card count changed from {table.total} to {nxt.size.sum()}")
    return nxt, frozenset(int(i) for i in np.flatnonzero(elim))


def play_game(
    m: int, rng: RandomSource, round_cap: int = DEFAULT_ROUND_CAP, allow_uneven: bool = True
) -> tuple[int, int, bool]:
    """Deal and play a full game; returns ``(rounds, winner, censored)``.

    Card conservation is checked after every round inside the kernel.
    """
    table = deal(m, rng, allow_uneven)
    return play_table(table, rng, round_cap)


def play_table(table: WarTable, rng: RandomSource, round_cap: int = DEFAULT_ROUND_CAP):
    t, winner, status = _play_game(table.cards, table.head, table.size, rng.gen, round_cap)
    if status == 2:
        raise ConservationError(f"card count drifted after round {t}")
    return int(t), int(winner), status == 1


def run_standard_war(config: RunConfig, bin_width: int = 50) -> SimSummary:
    if config.variant != "standard_war":
        raise ContractError(f"run_standard_war needs variant standard_war, got {config.variant}")
    if config.n != 52:
        raise ContractError(f"standard War uses 52 cards, got n={config.n}")
    cap = config.round_cap if config.round_cap is not None else DEFAULT_ROUND_CAP
    m = config.m

    def play(rng):
        t, _, censored = play_game(m, rng, cap)
        return GameResult(t, censored)

    return run_config(config, play, bin_width=bin_width)
