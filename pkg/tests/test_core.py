import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simplexwar.core import (
    Composition,
    ContractError,
    RandomSource,
    RunConfig,
    derive_stream,
    sample_winner,
)
from simplexwar.runner import GameResult, run_games


def draws(rng, k=64):
    return [rng.random() for _ in range(k)]


def test_derive_stream_is_deterministic():
    assert draws(derive_stream(42, 0)) == draws(derive_stream(42, 0))


def test_distinct_indices_give_distinct_streams():
    a, b = draws(derive_stream(42, 0)), draws(derive_stream(42, 1))
    assert any(x != y for x, y in zip(a, b))


def test_stream_independent_of_thread_count():
    def play(rng):
        return GameResult(int(rng.integers(0, 10**9)), False)

    one = run_games(play, seed=42, replications=1000, threads=1)
    eight = run_games(play, seed=42, replications=1000, threads=8)
    assert one == eight
    assert one[5].rounds == derive_stream(42, 5).integers(0, 10**9)


def test_negative_index_rejected():
    with pytest.raises(ContractError):
        derive_stream(1, -1)


@pytest.mark.parametrize(
    "p, u, expected",
    [
        ([1.0, 0.0], 0.7, 0),
        ([0.5, 0.5], 0.5, 0),
        ([0.5, 0.5], 0.500001, 1),
        ([3 / 7, 4 / 7], 0.42, 0),
        ([0.0, 1.0], 0.0, 1),
        ([0.2, 0.3, 0.5], 1.0, 2),
    ],
)
def test_sample_winner_examples(p, u, expected):
    assert sample_winner(p, u) == expected


@pytest.mark.parametrize("p", [[0.6, 0.6], [-0.1, 1.1], [0.5, 0.4]])
def test_sample_winner_rejects_bad_vectors(p):
    with pytest.raises(ContractError):
        sample_winner(p, 0.3)


prob_vectors = st.lists(st.integers(0, 20), min_size=1, max_size=6).filter(any).map(
    lambda w: [x / sum(w) for x in w]
)


@given(prob_vectors, st.floats(0, 1), st.floats(0, 1))
def test_sample_winner_monotone_in_u(p, u1, u2):
    lo, hi = sorted((u1, u2))
    assert sample_winner(p, lo) <= sample_winner(p, hi)


@given(prob_vectors, st.floats(0, 1))
def test_sample_winner_never_picks_zero_mass(p, u):
    assert p[sample_winner(p, u)] > 0


@pytest.mark.parametrize("p", [[0.5, 0.5], [0.1, 0.2, 0.3, 0.4], [0.0, 0.7, 0.3]])
def test_sample_winner_frequencies(p):
    rng = RandomSource(3, 0)
    n = 10**5
    u = rng.gen.random(n)
    counts = np.bincount([sample_winner(p, x) for x in u], minlength=len(p))
    for pi, c in zip(p, counts):
        se = np.sqrt(max(pi * (1 - pi), 1e-12) / n)
        assert abs(c / n - pi) <= 4 * se


def test_composition_invariants():
    c = Composition((3, 0, 1))
    assert c.n == 4 and c.m == 3 and c.support == (0, 2)
    assert not c.is_absorbing
    assert Composition((5, 0)).is_absorbing
    with pytest.raises(ContractError):
        Composition((1,))
    with pytest.raises(ContractError):
        Composition((2, -1))
    with pytest.raises(ContractError):
        Composition.equal(7, 3)


def test_run_config_validation():
    cfg = RunConfig("sticky_walk", 8, 4, seed=1)
    assert cfg.start == Composition((2, 2, 2, 2))
    assert cfg.cap == 100 * 64
    with pytest.raises(ContractError):
        RunConfig("sticky_walk", 8, 3, seed=1)
    with pytest.raises(ContractError):
        RunConfig("sticky_walk", 8, 2, seed=1, replications=0)
    with pytest.raises(ContractError):
        RunConfig("sticky_walk", 8, 2, seed=1, round_cap=0)
    with pytest.raises(ContractError):
        RunConfig("sticky_walk", 7, 2, seed=1, initial_sizes=Composition((3, 3)))
    # claim deals do not need m | n
    RunConfig("fwar", 7, 3, seed=1, deal="claim")


def test_run_config_roundtrip():
    cfg = RunConfig("pwar", 6, 3, seed=9, initial_sizes=Composition((3, 2, 1)), rule_id="highest_card")
    again = RunConfig.from_dict(cfg.to_dict())
    assert again.start == cfg.start and again.cap == cfg.cap and again.rule_id == "highest_card"
