"""Replication driver: one derived stream per game, deterministic aggregation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, NamedTuple

from .core import RandomSource, RunConfig, SimSummary, derive_stream
from .stats import Accumulator, summarize

CHUNK = 256


class GameResult(NamedTuple):
    rounds: int
    censored: bool
    extra: dict | None = None


GameFn = Callable[[RandomSource], GameResult]


def _run_chunk(play: GameFn, seed: int, lo: int, hi: int) -> list[GameResult]:
    return [play(derive_stream(seed, i)) for i in range(lo, hi)]


def run_games(play: GameFn, seed: int, replications: int, threads: int = 1) -> list[GameResult]:
    """Play ``replications`` games; result ``i`` always comes from stream ``i``."""
    chunks = [(lo, min(lo + CHUNK, replications)) for lo in range(0, replications, CHUNK)]
    if threads <= 1 or len(chunks) == 1:
        parts = [_run_chunk(play, seed, lo, hi) for lo, hi in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _run_chunk(play, seed, *c), chunks))
    return [r for part in parts for r in part]


def aggregate(results: list[GameResult], bin_width: int = 50):
    acc = Accumulator(bin_width=bin_width)
    for i, r in enumerate(results):
        if r.censored:
            acc.record_censored()
            continue
        acc.record(r.rounds, index=i)
        if r.extra:
            for k, v in r.extra.items():
                acc.add_extra(k, v)
    if acc.count == 0:
        nan = float("nan")
        return SimSummary(len(results), 0, acc.censored, nan, nan, nan, 0, bin_width=bin_width)
    return summarize(acc)


def run_config(config: RunConfig, play: GameFn, bin_width: int = 50):
    results = run_games(play, config.seed, config.replications, config.threads)
    return aggregate(results, bin_width)
