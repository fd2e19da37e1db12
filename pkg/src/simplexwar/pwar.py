"""Card-level engine for the uniform-draw War variant with pluggable winning rules.

Every nonempty hand plays a uniformly chosen card, a winning rule turns the
played cards and leftover hands into a probability vector, and the winner
collects every played card. Hands are unordered multisets, stored as sorted
tuples of ranks.
"""

from __future__ import annotations

import itertools
import runpy
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    PROB_TOL,
    Composition,
    ContractError,
    RandomSource,
    RunConfig,
    SimSummary,
    sample_winner,
)
from .runner import GameResult, run_config
from .sticky_walk import apply_move


class _Empty:
    """Marker played by a player whose hand is empty. Not a rank."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "PHI"

    def __reduce__(self):
        return (_Empty, ())


PHI = _Empty()

Hand = tuple[int, ...]
Evaluate = Callable[[Sequence, Sequence[Hand]], Sequence[float]]


@dataclass(frozen=True)
class WinningRule:
    id: str
    evaluate: Evaluate = field(compare=False)
    symmetric: bool = False

    def __call__(self, played, remaining) -> np.ndarray:
        return np.asarray(self.evaluate(tuple(played), tuple(remaining)), dtype=float)


def _uniform_active(played, remaining):
    active = [a is not PHI for a in played]
    k = sum(active)
    return [1.0 / k if on else 0.0 for on in active]


def _highest_card(played, remaining):
    ranks = [a for a in played if a is not PHI]
    top = max(ranks)
    winners = [a is not PHI and a == top for a in played]
    k = sum(winners)
    return [1.0 / k if w else 0.0 for w in winners]


RULES: dict[str, WinningRule] = {
    "uniform_active": WinningRule("uniform_active", _uniform_active, symmetric=True),
    "highest_card": WinningRule("highest_card", _highest_card, symmetric=True),
}


def builtin_rule(name: str) -> WinningRule:
    try:
        return RULES[name]
    except KeyError:
        raise ContractError(f"unknown winning rule {name!r}; known: {sorted(RULES)}") from None


def register_rule(rule: WinningRule) -> WinningRule:
    RULES[rule.id] = rule
    return rule


def load_rule_file(path) -> WinningRule:
    """Load a rule from a Python file defining ``rule`` or ``evaluate``."""
    ns = runpy.run_path(str(path))
    if isinstance(ns.get("rule"), WinningRule):
        return ns["rule"]
    if callable(ns.get("evaluate")):
        return WinningRule(
            ns.get("RULE_ID", str(path)), ns["evaluate"], bool(ns.get("SYMMETRIC", False))
        )
    raise ContractError(f"{path} defines neither `rule` nor `evaluate`")


# -- state and dynamics ---------------------------------------------------------------


@dataclass(frozen=True)
class PwarState:
    hands: tuple[Hand, ...]
    t: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hands", tuple(tuple(sorted(h)) for h in self.hands))

    @property
    def sizes(self) -> Composition:
        return Composition(tuple(len(h) for h in self.hands))

    @property
    def deck(self) -> Hand:
        return tuple(sorted(c for h in self.hands for c in h))

    @property
    def active(self) -> int:
        return sum(1 for h in self.hands if h)


def deal_uniform(deck: Sequence[int], sizes: Composition, rng: RandomSource) -> PwarState:
    """Shuffle the deck and cut it into hands of the given sizes."""
    if len(deck) != sizes.n:
        raise ContractError(f"deck of {len(deck)} cards cannot fill sizes {sizes.sizes}")
    cards = rng.gen.permutation(np.asarray(deck, dtype=np.int64)).tolist()
    hands, pos = [], 0
    for s in sizes:
        hands.append(tuple(cards[pos : pos + s]))
        pos += s
    return PwarState(tuple(hands))


def play_cards(state: PwarState, rng: RandomSource):
    """Each nonempty hand gives up one uniformly chosen card (with multiplicity)."""
    played, remaining = [], []
    for h in state.hands:
        if not h:
            played.append(PHI)
            remaining.append(())
            continue
        j = rng.integers(0, len(h))
        played.append(h[j])
        remaining.append(h[:j] + h[j + 1 :])
    return tuple(played), tuple(remaining)


def resolve(played, remaining, winner: int, t: int) -> PwarState:
    if played[winner] is PHI:
        raise ContractError(f"rule selected player {winner}, who has no card")
    won = tuple(a for a in played if a is not PHI)
    hands = [r + won if i == winner else r for i, r in enumerate(remaining)]
    return PwarState(tuple(hands), t + 1)


def pwar_step(state: PwarState, rule: WinningRule, rng: RandomSource) -> tuple[PwarState, int]:
    if state.active < 2:
        raise ContractError("pwar_step needs at least two nonempty hands")
    played, remaining = play_cards(state, rng)
    p = rule(played, remaining)
    winner = sample_winner(p, rng.random())
    return resolve(played, remaining, winner, state.t), winner


def play_pwar_game(state: PwarState, rule: WinningRule, rng: RandomSource, round_cap: int):
    while state.active > 1:
        if state.t >= round_cap:
            return state.t, True
        state, _ = pwar_step(state, rule, rng)
    return state.t, False


def run_pwar(config: RunConfig, rule: WinningRule | None = None) -> SimSummary:
    if config.variant != "pwar":
        raise ContractError(f"run_pwar needs variant pwar, got {config.variant}")
    if rule is None:
        rule = builtin_rule(config.rule_id or "uniform_active")
    deck = tuple(range(1, config.n + 1))
    sizes, cap = config.start, config.cap

    def play(rng):
        t, censored = play_pwar_game(deal_uniform(deck, sizes, rng), rule, rng, cap)
        return GameResult(t, censored)

    return run_config(config, play)


# -- rule validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: dict


@dataclass
class ValidationReport:
    rule_id: str
    checked: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def axioms_violated(self) -> set[str]:
        return {v.axiom for v in self.violations}


def _random_configuration(n: int, m: int, rng: RandomSource):
    if rng.random() < 0.5:
        deck = list(range(1, n + 1))
    else:
        deck = [rng.integers(1, n + 1) for _ in range(n)]
    cuts = sorted(rng.integers(0, n + 1) for _ in range(m - 1))
    sizes = [b - a for a, b in zip([0] + cuts, cuts + [n])]
    order = rng.gen.permutation(m)
    sizes = [sizes[i] for i in order]
    if sum(1 for s in sizes if s) == 0:
        sizes[0] = n
    state = deal_uniform(deck, Composition(tuple(sizes)), rng)
    return play_cards(state, rng)


def _check(rule, played, remaining, perms, report: ValidationReport, max_witnesses: int):
    def fail(axiom, **witness):
        if len(report.violations) < max_witnesses:
            report.violations.append(Violation(axiom, witness))

    m = len(played)
    report.checked += 1
    try:
        p = rule(played, remaining)
    except Exception as exc:  # rule crashed on a legal input
        fail("evaluates", played=played, remaining=remaining, error=repr(exc))
        return
    if p.shape != (m,) or np.any(p < -PROB_TOL) or abs(p.sum() - 1.0) > PROB_TOL:
        fail("simplex", played=played, remaining=remaining, output=p.tolist())
        return
    for i in range(m):
        if played[i] is PHI and not remaining[i] and p[i] != 0.0:
            fail("empty_player_zero", player=i, played=played, output=p.tolist())
    for sigma in perms:
        q = rule([played[s] for s in sigma], [remaining[s] for s in sigma])
        if not np.allclose(q, p[list(sigma)], rtol=0, atol=PROB_TOL):
            fail("equivariance", sigma=sigma, played=played, output=p.tolist(), permuted=q.tolist())
            break
    if rule.symmetric:
        for sigma in perms:
            q = rule(played, [remaining[s] for s in sigma])
            if not np.allclose(q, p, rtol=0, atol=PROB_TOL):
                fail("symmetry", sigma=sigma, played=played, output=p.tolist(), permuted=q.tolist())
                break


def validate_rule(
    rule: WinningRule, n: int, m: int, samples: int, rng: RandomSource, max_witnesses: int = 10
) -> ValidationReport:
    """Check the winning-rule axioms on random legal configurations.

    Each sample draws a deck (distinct or repeated ranks), random hand sizes
    (zeros allowed), and a uniform play, then applies one random permutation
    for the equivariance and symmetry checks.
    """
    if samples < 1:
        raise ContractError("samples must be >= 1")
    report = ValidationReport(rule.id)
    for _ in range(samples):
        played, remaining = _random_configuration(n, m, rng)
        sigma = tuple(int(s) for s in rng.gen.permutation(m))
        _check(rule, played, remaining, [sigma], report, max_witnesses)
    return report


def validate_rule_exhaustive(rule: WinningRule, n: int, m: int, max_witnesses: int = 10):
    """Every played tuple over ranks 1..n and PHI, with adjacent transpositions.

    Leftover cards are spread round-robin over the players who played a card.
    Adjacent transpositions generate the symmetric group, so passing them on
    every configuration covers all permutations.
    """
    report = ValidationReport(rule.id)
    transpositions = []
    for i in range(m - 1):
        s = list(range(m))
        s[i], s[i + 1] = s[i + 1], s[i]
        transpositions.append(tuple(s))
    symbols = list(range(1, n + 1)) + [PHI]
    for played in itertools.product(symbols, repeat=m):
        live = [i for i, a in enumerate(played) if a is not PHI]
        if not live or len(live) > n:
            continue
        rest = [[] for _ in range(m)]
        for k in range(n - len(live)):
            rest[live[k % len(live)]].append(1 + k % n)
        _check(rule, played, [tuple(r) for r in rest], transpositions, report, max_witnesses)
    return report


# -- equivalence with the sticky walk ---------------------------------------------------


@dataclass(frozen=True)
class ComparisonReport:
    sizes: tuple[int, ...]
    reps: int
    winner_counts: tuple[int, ...]
    expected: tuple[float, ...]
    tv_distance: float
    chi_square: float
    dof: int
    size_update_ok: bool


def equivalence_check(
    sizes: Composition,
    rule: WinningRule,
    reps: int,
    rng: RandomSource,
    deck: Sequence[int] | None = None,
) -> ComparisonReport:
    """Single-round winner frequencies from fresh uniform deals vs uniform-on-active."""
    if deck is None:
        deck = tuple(range(1, sizes.n + 1))
    support = sizes.support
    counts = [0] * sizes.m
    update_ok = True
    for _ in range(reps):
        state = deal_uniform(deck, sizes, rng)
        nxt, w = pwar_step(state, rule, rng)
        counts[w] += 1
        if nxt.sizes != apply_move(sizes, w):
            update_ok = False
    expected = tuple(1.0 / len(support) if i in support else 0.0 for i in range(sizes.m))
    freq = np.array(counts) / reps
    tv = 0.5 * float(np.abs(freq - np.array(expected)).sum())
    chi2 = sum(
        (counts[i] - reps * expected[i]) ** 2 / (reps * expected[i]) for i in support
    )
    return ComparisonReport(
        sizes.sizes, reps, tuple(counts), expected, tv, float(chi2), len(support) - 1, update_ok
    )
