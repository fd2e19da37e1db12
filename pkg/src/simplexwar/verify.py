"""Invariant checks shared by ``simplexwar verify`` and the test suite."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import Composition, RandomSource, RunConfig
from .fwar import FwarState, claim_moments, martingale_step_identity_f, strength
from .pwar import RULES, WinningRule, equivalence_check, validate_rule
from .sticky_walk import (
    exact_expected_absorption,
    exact_table,
    martingale_step_identity,
    run_walk,
    sandell_tau1,
    theorem_bounds,
    three_player_expectation,
)

SOLVE_TOL = 1e-12


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    failures: list = field(default_factory=list)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def compositions(n: int, m: int):
    """All ordered m-tuples of nonnegative integers summing to n."""
    for cuts in itertools.combinations(range(n + m - 1), m - 1):
        prev = -1
        parts = []
        for c in cuts + (n + m - 1,):
            parts.append(c - prev - 1)
            prev = c
        yield tuple(parts)


def check_walk_martingale(max_n: int = 12, max_m: int = 4) -> CheckResult:
    fails, count = [], 0
    for m in range(2, max_m + 1):
        for n in range(1, max_n + 1):
            for c in compositions(n, m):
                pos = Composition(c)
                if pos.is_absorbing:
                    continue
                got, want = martingale_step_identity(pos)
                count += 1
                if abs(got - want) > 1e-12 * max(1.0, abs(want)):
                    fails.append({"composition": c, "expected": got, "predicted": want})
    return CheckResult("walk_martingale_identity", not fails, f"{count} compositions", fails)


def random_fwar_state(rng: RandomSource, max_n: int = 10, max_m: int = 4, f=None) -> FwarState:
    """A random state with at least two nonempty hands."""
    while True:
        n = rng.integers(2, max_n + 1)
        m = rng.integers(2, max_m + 1)
        owner = [rng.integers(0, m) for _ in range(n)]
        if len(set(owner)) < 2:
            continue
        cards = rng.gen.permutation(np.arange(1, n + 1)).tolist()
        hands = [[c for c, o in zip(cards, owner) if o == i] for i in range(m)]
        return FwarState(hands, f or strength("affine"), n)


def check_fwar_martingale(states: int = 1000, seed: int = 2024, max_n=10, max_m=4) -> CheckResult:
    rng = RandomSource(seed, 0)
    fns = [strength("affine"), strength("constant"), strength("quadratic")]
    fails = []
    for k in range(states):
        s = random_fwar_state(rng, max_n, max_m, fns[k % 3])
        got, want = martingale_step_identity_f(s)
        if abs(got - want) > 1e-9 * abs(want):
            fails.append({"hands": s.hands, "f": s.f.id, "expected": got, "predicted": want})
    return CheckResult("fwar_martingale_identity", not fails, f"{states} random states", fails)


def check_gamblers_ruin(max_total: int = 20, tol: float = 1e-8) -> CheckResult:
    fails, count = [], 0
    for n in range(2, max_total + 1):
        for a in range(1, n):
            h = exact_expected_absorption(Composition((a, n - a)), SOLVE_TOL).expected_time
            count += 1
            if abs(h - a * (n - a)) > tol:
                fails.append({"start": (a, n - a), "solver": h, "closed_form": a * (n - a)})
    return CheckResult("solver_vs_two_player", not fails, f"{count} starts, a+b<={max_total}", fails)


def _three_player_starts(max_total):
    for n in range(3, max_total + 1):
        for a1 in range(1, n - 1):
            for a2 in range(1, n - a1):
                yield a1, a2, n - a1 - a2


def check_three_player(max_total: int = 15, tol: float = 1e-8) -> CheckResult:
    fails, count = [], 0
    for a in _three_player_starts(max_total):
        h = exact_expected_absorption(Composition(a), SOLVE_TOL).expected_time
        count += 1
        if abs(h - three_player_expectation(*a)) > tol:
            fails.append({"start": a, "solver": h, "closed_form": three_player_expectation(*a)})
    return CheckResult("solver_vs_three_player", not fails, f"{count} starts, sum<={max_total}", fails)


def check_sandell(max_total: int = 15, tol: float = 1e-8) -> CheckResult:
    fails, count = [], 0
    for a in _three_player_starts(max_total):
        h = exact_expected_absorption(Composition(a), SOLVE_TOL, target="first_elimination")
        count += 1
        if abs(h.expected_time - sandell_tau1(*a)) > tol:
            fails.append({"start": a, "solver": h.expected_time, "closed_form": sandell_tau1(*a)})
    return CheckResult("solver_vs_first_elimination", not fails, f"{count} starts", fails)


def check_bounds_containment(max_n: int = 15, max_m: int = 4) -> CheckResult:
    """Every exactly solved start lies inside the closed-form bound interval."""
    fails, count = [], 0
    for m in range(2, max_m + 1):
        for n in range(2, max_n + 1):
            table = exact_table(n, m, SOLVE_TOL)
            for state, h in table.items():
                lo, hi = theorem_bounds(Composition(state))
                count += 1
                if not (lo - 1e-9 <= h <= hi + 1e-9):
                    fails.append({"start": state, "exact": h, "lower": lo, "upper": hi})
    return CheckResult("bounds_containment", not fails, f"{count} solved starts", fails)


def check_walk_monte_carlo(reps: int = 10**4, seed: int = 7) -> CheckResult:
    fails = []
    details = []
    for n, m in [(8, 2), (8, 4), (9, 3)]:
        start = Composition.equal(n, m)
        s = run_walk(RunConfig("sticky_walk", n, m, seed=seed, replications=reps))
        h = exact_expected_absorption(start).expected_time
        lo, hi = theorem_bounds(start)
        z = abs(s.mean_rounds - h) / s.std_error
        details.append(f"({n},{m}) mean={s.mean_rounds:.3f} exact={h:.3f} z={z:.2f}")
        if z > 4 or not (lo - 4 * s.std_error <= s.mean_rounds <= hi + 4 * s.std_error):
            fails.append({"n": n, "m": m, "mean": s.mean_rounds, "se": s.std_error, "exact": h})
    return CheckResult("walk_monte_carlo", not fails, "; ".join(details), fails)


def check_rule(rule: WinningRule, samples: int = 1000, seed: int = 11, max_n=10, max_m=4):
    rng = RandomSource(seed, 0)
    fails, checked = [], 0
    for m in range(2, max_m + 1):
        for n in range(max(m, 2), max_n + 1):
            rep = validate_rule(rule, n, m, max(1, samples // 10), rng)
            checked += rep.checked
            fails += [{"n": n, "m": m, "axiom": v.axiom, "witness": repr(v.witness)} for v in rep.violations]
            if len(fails) > 20:
                break
    return CheckResult(f"rule_axioms[{rule.id}]", not fails, f"{checked} configurations", fails)


def check_equivalence(reps: int = 10**4, seed: int = 13) -> CheckResult:
    rng = RandomSource(seed, 0)
    rule = RULES["highest_card"]
    fails, details = [], []
    for sizes in [(2, 2), (3, 2, 1), (4, 4, 4)]:
        rep = equivalence_check(Composition(sizes), rule, reps, rng)
        details.append(f"{sizes} tv={rep.tv_distance:.4f}")
        if rep.tv_distance > 0.02 or not rep.size_update_ok:
            fails.append({"sizes": sizes, "tv": rep.tv_distance, "update_ok": rep.size_update_ok})
    return CheckResult("walk_equivalence", not fails, "; ".join(details), fails)


def check_claim_moments() -> CheckResult:
    fails = []
    for n, m in [(2, 1), (2, 2), (3, 2), (4, 3), (5, 2)]:
        f = np.arange(n + 1) + n
        sums, sqs = [], []
        for owner in itertools.product(range(m), repeat=n):
            M = [sum(int(f[c + 1]) for c, o in enumerate(owner) if o == i) for i in range(m)]
            sums.append(sum(M))
            sqs.append(sum(x * x for x in M))
        mean_sum, mean_sq = claim_moments(n, m)
        if abs(np.mean(sums) - mean_sum) > 1e-9 or abs(np.mean(sqs) - mean_sq) > 1e-9 * mean_sq:
            fails.append({"n": n, "m": m, "enumerated": (np.mean(sums), np.mean(sqs)), "formula": (mean_sum, mean_sq)})
    return CheckResult("claim_moments_enumeration", not fails, "exhaustive deals", fails)


def run_all(max_n: int = 12, max_m: int = 4, reps: int = 10**4, extra_rules=()) -> list[CheckResult]:
    results = [
        check_walk_martingale(max_n, max_m),
        check_fwar_martingale(max_n=min(max_n, 10), max_m=max_m),
        check_gamblers_ruin(),
        check_three_player(),
        check_sandell(),
        check_bounds_containment(min(max_n, 15), max_m),
        check_claim_moments(),
    ]
    for rule in list(RULES.values()) + list(extra_rules):
        results.append(check_rule(rule, max_n=min(max_n, 10), max_m=max_m))
    results.append(check_equivalence(reps))
    results.append(check_walk_monte_carlo(reps))
    return results
