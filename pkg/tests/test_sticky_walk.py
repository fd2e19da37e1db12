import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simplexwar.core import Composition, ContractError, RandomSource, RunConfig
from simplexwar.sticky_walk import (
    StateSpaceTooLarge,
    WalkState,
    absorption_time,
    apply_move,
    equal_three_player_expectation,
    exact_expected_absorption,
    martingale_step_identity,
    partition_count,
    run_walk,
    sandell_tau1,
    termination_tail_bound,
    theorem_bounds,
    three_player_expectation,
    walk_step,
)
from simplexwar.verify import compositions


def dense_oracle(start, first_elimination=False):
    """Dense solve on ordered compositions; no canonicalization, no iteration."""
    start = tuple(start)
    n, m = sum(start), len(start)
    k0 = sum(1 for a in start if a)
    floor = k0 if first_elimination else 2
    states = [c for c in compositions(n, m) if sum(1 for a in c if a) >= floor]
    idx = {s: i for i, s in enumerate(states)}
    A = np.eye(len(states))
    for s in states:
        sup = [i for i, a in enumerate(s) if a]
        for v in sup:
            nxt = tuple(a - 1 + (len(sup) if i == v else 0) if a else 0 for i, a in enumerate(s))
            if nxt in idx:
                A[idx[s], idx[nxt]] -= 1 / len(sup)
    h = np.linalg.solve(A, np.ones(len(states)))
    return h[idx[start]]


# -- moves -----------------------------------------------------------------------


@pytest.mark.parametrize(
    "start, winner, expected",
    [((1, 1), 0, (2, 0)), ((2, 1, 1), 0, (4, 0, 0)), ((3, 0, 1), 2, (2, 0, 2))],
)
def test_apply_move_examples(start, winner, expected):
    assert apply_move(Composition(start), winner).sizes == expected


def test_walk_step_rejects_absorbing():
    with pytest.raises(ContractError):
        walk_step(WalkState(Composition((4, 0))), RandomSource(1))


def test_apply_move_rejects_inactive_winner():
    with pytest.raises(ContractError):
        apply_move(Composition((3, 0, 1)), 1)


@st.composite
def live_compositions(draw):
    m = draw(st.integers(2, 6))
    sizes = draw(st.lists(st.integers(0, 8), min_size=m, max_size=m))
    if sum(1 for s in sizes if s) < 2:
        sizes[0], sizes[1] = sizes[0] or 1, sizes[1] or 1
    return Composition(tuple(sizes))


@given(live_compositions(), st.integers(0, 2**32))
@settings(max_examples=200)
def test_walk_conserves_and_sticks(pos, seed):
    rng = RandomSource(seed)
    state = WalkState(pos)
    for _ in range(30):
        if state.position.is_absorbing:
            break
        nxt = walk_step(state, rng)
        assert nxt.position.n == pos.n
        assert set(nxt.position.support) <= set(state.position.support)
        assert nxt.t == state.t + 1
        state = nxt


def test_walk_winner_uniform_on_support():
    rng = RandomSource(17)
    pos = Composition((3, 0, 2, 5))
    counts = {}
    n = 30000
    for _ in range(n):
        nxt = walk_step(WalkState(pos), rng).position
        w = max(range(4), key=lambda i: nxt[i] - pos[i])
        counts[w] = counts.get(w, 0) + 1
    assert set(counts) == {0, 2, 3}
    for c in counts.values():
        assert abs(c / n - 1 / 3) <= 4 * np.sqrt(2 / 9 / n)


# -- absorption time -----------------------------------------------------------------


@pytest.mark.parametrize(
    "start, expected", [((6, 0, 0), 0), ((1, 1), 1), ((1, 1, 1), 1), ((0, 1, 1), 1)]
)
def test_absorption_time_forced(start, expected):
    for seed in range(20):
        assert absorption_time(Composition(start), RandomSource(seed), 100) == (expected, False)


def test_absorption_time_censoring():
    t, censored = absorption_time(Composition((50, 50)), RandomSource(1), 3)
    assert (t, censored) == (3, True)


# -- exact solver ---------------------------------------------------------------------


@pytest.mark.parametrize(
    "start, expected", [((1, 1), 1.0), ((2, 2, 2), 8.0), ((1, 1, 2), 3.0), ((3, 4), 12.0)]
)
def test_exact_examples(start, expected):
    r = exact_expected_absorption(Composition(start), 1e-12)
    assert r.expected_time == pytest.approx(expected, abs=1e-9)
    assert r.residual <= 1e-12


@pytest.mark.parametrize("start", [(1, 1, 2), (2, 3, 1), (1, 2, 1, 2), (3, 0, 2, 1), (4, 2)])
def test_exact_matches_dense_oracle(start):
    got = exact_expected_absorption(Composition(start), 1e-12).expected_time
    assert got == pytest.approx(dense_oracle(start), abs=1e-9)


@pytest.mark.parametrize("start", [(1, 1, 2), (2, 2, 2), (1, 3, 2), (2, 1, 1, 2)])
def test_first_elimination_matches_dense_oracle(start):
    got = exact_expected_absorption(Composition(start), 1e-12, target="first_elimination")
    assert got.expected_time == pytest.approx(dense_oracle(start, True), abs=1e-9)


def test_permutation_symmetry():
    start = (1, 3, 2, 0)
    ref = dense_oracle(start)
    for perm in itertools.permutations(start):
        assert dense_oracle(perm) == pytest.approx(ref, abs=1e-9)
        assert exact_expected_absorption(Composition(perm), 1e-12).expected_time == pytest.approx(ref, abs=1e-9)


def test_exact_absorbing_start_is_zero():
    assert exact_expected_absorption(Composition((5, 0, 0))).expected_time == 0.0


def test_state_space_limit():
    assert partition_count(10, 3) == 14
    with pytest.raises(StateSpaceTooLarge):
        exact_expected_absorption(Composition.equal(60, 6), max_states=1000)


# -- closed forms -----------------------------------------------------------------------


@pytest.mark.parametrize(
    "start, bounds",
    [((2, 2, 2), (4.0, 12.0)), ((2, 2), (4.0, 4.0)), ((6, 0, 0), (0.0, 0.0))],
)
def test_theorem_bounds(start, bounds):
    assert theorem_bounds(Composition(start)) == bounds


def test_equal_bounds_closed_form():
    for n, m in [(12, 3), (16, 4), (10, 5)]:
        lo, hi = theorem_bounds(Composition.equal(n, m))
        assert lo == pytest.approx(n * n / m**2)
        assert hi == pytest.approx(n * n * (m - 1) / (2 * m))


def test_three_player_examples():
    assert three_player_expectation(2, 2, 2) == 8.0
    assert equal_three_player_expectation(6) == 8.0
    assert three_player_expectation(1, 1, 1) == 1.0
    # oracle: dense solve on the 15 ordered compositions of 4 into 3 parts
    assert three_player_expectation(1, 1, 2) == pytest.approx(dense_oracle((1, 1, 2)))
    with pytest.raises(ContractError):
        three_player_expectation(1, 1, 0)


def test_sandell_examples():
    assert sandell_tau1(2, 2, 2) == 2.0
    assert sandell_tau1(1, 1, 1) == 1.0
    # from (1,1,2) every outcome eliminates someone in one step
    assert sandell_tau1(1, 1, 2) == pytest.approx(dense_oracle((1, 1, 2), True)) == 1.0
    with pytest.raises(ContractError):
        sandell_tau1(1, 1, 0)


@pytest.mark.parametrize(
    "pos, expected", [((1, 1), 4.0), ((2, 1, 1), 12.0), ((3, 1), 12.0), ((0, 2, 2), 10.0)]
)
def test_martingale_identity_examples(pos, expected):
    got, predicted = martingale_step_identity(Composition(pos))
    assert got == predicted == expected


def test_martingale_identity_exhaustive_small():
    for m in (2, 3, 4):
        for n in range(2, 9):
            for c in compositions(n, m):
                pos = Composition(c)
                if not pos.is_absorbing:
                    got, want = martingale_step_identity(pos)
                    assert got == pytest.approx(want, rel=1e-12)


def test_tail_bound():
    assert termination_tail_bound(4, 2, 3) == 1.0
    assert termination_tail_bound(4, 2, 8) == pytest.approx((1 - 1 / 16) ** 2)
    assert 0 < termination_tail_bound(128, 2, 10**9) <= 1.0


# -- Monte Carlo ---------------------------------------------------------------------------


@pytest.mark.parametrize("n, m", [(8, 2), (8, 4), (9, 3)])
def test_monte_carlo_matches_exact(n, m):
    s = run_walk(RunConfig("sticky_walk", n, m, seed=21, replications=10**4))
    h = exact_expected_absorption(Composition.equal(n, m)).expected_time
    assert abs(s.mean_rounds - h) <= 4 * s.std_error
    assert s.censored == 0


def test_run_walk_thread_invariant():
    cfg = RunConfig("sticky_walk", 16, 4, seed=3, replications=2000)
    assert run_walk(cfg) == run_walk(cfg.with_threads(8))
