"""Mergeable, order-independent aggregation of round counts."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .core import SimSummary

FULL_RETENTION = 10**6


class EmptyAccumulatorError(ValueError):
    pass


@dataclass
class Accumulator:
    """Exact integer moments plus retained values for quantiles.

    ``sum`` and ``sum_sq`` are Python ints, so merged results do not depend on
    merge order. Values are kept as ``(replication_index, rounds)`` pairs; past
    ``retain`` entries only indices divisible by a doubling stride survive,
    which gives the same sample no matter how the work was split.
    """

    bin_width: int = 50
    retain: int = FULL_RETENTION
    count: int = 0
    sum: int = 0
    sum_sq: int = 0
    max: int = 0
    censored: int = 0
    bins: Counter = field(default_factory=Counter)
    values: list = field(default_factory=list)
    stride: int = 1
    extra_sums: dict = field(default_factory=dict)

    def record(self, rounds: int, index: int | None = None) -> "Accumulator":
        rounds = int(rounds)
        if rounds < 0:
            raise ValueError(f"rounds must be >= 0, got {rounds}")
        if index is None:
            index = self.count + self.censored
        self.count += 1
        self.sum += rounds
        self.sum_sq += rounds * rounds
        self.max = max(self.max, rounds)
        self.bins[rounds // self.bin_width] += 1
        if index % self.stride == 0:
            self.values.append((index, rounds))
            self._thin()
        return self

    def record_censored(self) -> "Accumulator":
        self.censored += 1
        return self

    def add_extra(self, key: str, value) -> None:
        self.extra_sums[key] = self.extra_sums.get(key, 0) + value

    def _thin(self):
        while len(self.values) > self.retain:
            self.stride *= 2
            self.values = [(i, v) for i, v in self.values if i % self.stride == 0]

    def merge(self, other: "Accumulator") -> "Accumulator":
        if self.bin_width != other.bin_width:
            raise ValueError("cannot merge accumulators with different bin widths")
        out = Accumulator(bin_width=self.bin_width, retain=min(self.retain, other.retain))
        out.count = self.count + other.count
        out.sum = self.sum + other.sum
        out.sum_sq = self.sum_sq + other.sum_sq
        out.max = max(self.max, other.max)
        out.censored = self.censored + other.censored
        out.bins = self.bins + other.bins
        out.stride = max(self.stride, other.stride)
        out.values = sorted(
            (iv for iv in self.values + other.values if iv[0] % out.stride == 0)
        )
        out._thin()
        for src in (self.extra_sums, other.extra_sums):
            for k, v in src.items():
                out.add_extra(k, v)
        return out

    @property
    def mean(self) -> float:
        if not self.count:
            raise EmptyAccumulatorError("empty accumulator")
        return self.sum / self.count


def record(acc: Accumulator, rounds: int) -> Accumulator:
    return acc.record(rounds)


def median_of(sorted_values) -> float:
    k = len(sorted_values)
    mid = k // 2
    if k % 2:
        return float(sorted_values[mid])
    return (sorted_values[mid - 1] + sorted_values[mid]) / 2


def summarize(acc: Accumulator, extra: dict | None = None) -> SimSummary:
    if acc.count == 0:
        raise EmptyAccumulatorError("empty accumulator")
    n = acc.count
    mean = acc.sum / n
    if n > 1:
        # exact integer numerator avoids catastrophic cancellation
        ss = n * acc.sum_sq - acc.sum * acc.sum
        var = ss / (n * (n - 1))
        se = math.sqrt(var / n)
    else:
        se = 0.0
    vals = sorted(v for _, v in acc.values)
    hist = tuple((b * acc.bin_width, c) for b, c in sorted(acc.bins.items()))
    extras = {k: v / n for k, v in acc.extra_sums.items()}
    if extra:
        extras.update(extra)
    return SimSummary(
        replications=acc.count + acc.censored,
        completed=acc.count,
        censored=acc.censored,
        mean_rounds=mean,
        std_error=se,
        median_rounds=median_of(vals),
        max_rounds=acc.max,
        histogram=hist,
        bin_width=acc.bin_width,
        approximate_quantiles=acc.stride > 1,
        extra=extras,
    )


def histogram_rows(summary: SimSummary) -> list[tuple[int, int, int]]:
    """``(bin_lower, bin_upper, count)`` rows with empty interior bins filled in."""
    if not summary.histogram:
        return []
    w = summary.bin_width
    counts = dict(summary.histogram)
    lo = summary.histogram[0][0]
    hi = summary.histogram[-1][0]
    return [(b, b + w, counts.get(b, 0)) for b in range(lo, hi + w, w)]
