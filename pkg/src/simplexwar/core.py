"""Domain types shared by every engine, plus seeded random streams."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

PROB_TOL = 1e-9
VARIANTS = ("sticky_walk", "pwar", "fwar", "standard_war")


class ContractError(ValueError):
    """Raised when an operation is called outside its precondition."""


@dataclass(frozen=True)
class Composition:
    """Hand sizes of ``m`` players; the state of the sticky walk."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if len(sizes) < 2:
            raise ContractError(f"need at least 2 players, got {len(sizes)}")
        if any(s < 0 for s in sizes):
            raise ContractError(f"negative hand size in {sizes}")
        if sum(sizes) < 1:
            raise ContractError("total card count must be positive")

    @classmethod
    def equal(cls, n: int, m: int) -> "Composition":
        if m < 2 or n % m:
            raise ContractError(f"equal split needs m >= 2 dividing n (n={n}, m={m})")
        return cls((n // m,) * m)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def m(self) -> int:
        return len(self.sizes)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.sizes) if s > 0)

    @property
    def is_absorbing(self) -> bool:
        return len(self.support) == 1

    def __iter__(self):
        return iter(self.sizes)

    def __len__(self):
        return len(self.sizes)

    def __getitem__(self, i):
        return self.sizes[i]


def parse_sizes(text: str) -> Composition:
    try:
        sizes = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ContractError(f"expected comma-separated integers, got {text!r}") from None
    return Composition(sizes)


@dataclass(frozen=True)
class RunConfig:
    """One experiment: which engine, how big, how many games, which seed."""

    variant: str
    n: int
    m: int
    seed: int
    replications: int = 1000
    initial_sizes: Composition | str = "equal"
    rule_id: str | None = None
    f_id: str | None = None
    deal: str = "equal"
    round_cap: int | None = None
    threads: int = 1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ContractError(f"unknown variant {self.variant!r}")
        if self.m < 2:
            raise ContractError(f"need m >= 2 players, got {self.m}")
        if self.n < 1:
            raise ContractError(f"need n >= 1 cards, got {self.n}")
        if self.replications < 1:
            raise ContractError("replications must be >= 1")
        if self.threads < 1:
            raise ContractError("threads must be >= 1")
        if self.round_cap is not None and self.round_cap < 1:
            raise ContractError("round_cap must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ContractError("seed must be a 64-bit unsigned integer")
        if self.deal not in ("equal", "claim"):
            raise ContractError(f"unknown deal mode {self.deal!r}")
        if isinstance(self.initial_sizes, str):
            if self.initial_sizes != "equal":
                raise ContractError(f"initial_sizes must be 'equal' or a Composition")
            needs_divisible = self.variant in ("sticky_walk", "pwar") or (
                self.variant == "fwar" and self.deal == "equal"
            )
            if needs_divisible and self.n % self.m:
                raise ContractError(f"equal deal needs m | n (n={self.n}, m={self.m})")
        else:
            sizes = self.initial_sizes
            if not isinstance(sizes, Composition):
                sizes = Composition(tuple(sizes))
                object.__setattr__(self, "initial_sizes", sizes)
            if sizes.m != self.m or sizes.n != self.n:
                raise ContractError(
                    f"initial sizes {sizes.sizes} inconsistent with n={self.n}, m={self.m}"
                )

    @property
    def start(self) -> Composition:
        if isinstance(self.initial_sizes, Composition):
            return self.initial_sizes
        return Composition.equal(self.n, self.m)

    @property
    def cap(self) -> int:
        return self.round_cap if self.round_cap is not None else 100 * self.n**2

    def with_threads(self, threads: int) -> "RunConfig":
        return replace(self, threads=threads)

    def to_dict(self) -> dict:
        d = {
            "variant": self.variant,
            "n": self.n,
            "m": self.m,
            "seed": self.seed,
            "replications": self.replications,
            "initial_sizes": (
                self.initial_sizes
                if isinstance(self.initial_sizes, str)
                else list(self.initial_sizes.sizes)
            ),
            "rule_id": self.rule_id,
            "f_id": self.f_id,
            "deal": self.deal,
            "round_cap": self.cap,
            "threads": self.threads,
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        sizes = d.get("initial_sizes", "equal")
        if not isinstance(sizes, str):
            d["initial_sizes"] = Composition(tuple(sizes))
        return cls(**d)


@dataclass(frozen=True)
class SimSummary:
    """Termination statistics over the completed (non-censored) runs."""

    replications: int
    completed: int
    censored: int
    mean_rounds: float
    std_error: float
    median_rounds: float
    max_rounds: int
    histogram: tuple[tuple[int, int], ...] = ()
    bin_width: int = 50
    approximate_quantiles: bool = False
    extra: dict = field(default_factory=dict)

    CSV_FIELDS = (
        "replications",
        "completed",
        "censored",
        "mean_rounds",
        "std_error",
        "median_rounds",
        "max_rounds",
    )

    def csv_header(self) -> str:
        return ",".join(self.CSV_FIELDS)

    def csv_row(self) -> str:
        return ",".join(_fmt(getattr(self, k)) for k in self.CSV_FIELDS)

    def to_dict(self) -> dict:
        return {
            "replications": self.replications,
            "completed": self.completed,
            "censored": self.censored,
            "mean_rounds": self.mean_rounds,
            "std_error": self.std_error,
            "median_rounds": self.median_rounds,
            "max_rounds": self.max_rounds,
            "bin_width": self.bin_width,
            "histogram": [list(b) for b in self.histogram],
            "approximate_quantiles": self.approximate_quantiles,
            "extra": dict(self.extra),
        }


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else "nan"
    return str(x)


class RandomSource:
    """Single-owner random stream identified by ``(seed, stream_index)``.

    Streams come from ``SeedSequence(seed, spawn_key=(stream_index,))`` feeding
    PCG64, so replications are independent of each other and of the order or
    thread on which they run. The wrapped ``gen`` is handed straight to the
    numba kernels.
    """

    __slots__ = ("seed", "stream_index", "gen")

    def __init__(self, seed: int, stream_index: int = 0):
        if seed < 0 or stream_index < 0:
            raise ContractError("seed and stream_index must be non-negative")
        self.seed = int(seed)
        self.stream_index = int(stream_index)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_index,))
        self.gen = np.random.Generator(np.random.PCG64(ss))

    def random(self) -> float:
        return float(self.gen.random())

    def integers(self, low: int, high: int) -> int:
        return int(self.gen.integers(low, high))

    def shuffle(self, x) -> None:
        self.gen.shuffle(x)

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, stream_index={self.stream_index})"


def derive_stream(seed: int, replication_index: int) -> RandomSource:
    if replication_index < 0:
        raise ContractError("replication_index must be >= 0")
    return RandomSource(seed, replication_index)


def check_probabilities(probabilities: Sequence[float], tol: float = PROB_TOL) -> np.ndarray:
    p = np.asarray(probabilities, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ContractError("probability vector must be a non-empty 1-d sequence")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ContractError(f"negative or non-finite probability in {p.tolist()}")
    if abs(p.sum() - 1.0) > tol:
        raise ContractError(f"probabilities sum to {p.sum()!r}, not 1")
    return p


def sample_winner(probabilities: Sequence[float], u: float) -> int:
    """Return the 0-based index ``i`` with ``u`` in ``(x_{i-1}, x_i]``.

    ``x`` is the running sum of ``probabilities``. ``u = 0`` selects the first
    index carrying positive mass, and round-off leaving ``u`` above the final
    partial sum selects the last such index.
    """
    p = check_probabilities(probabilities)
    if not 0.0 <= u <= 1.0:
        raise ContractError(f"u must lie in [0, 1], got {u}")
    x = 0.0
    last = -1
    for i, pi in enumerate(p):
        if pi <= 0.0:
            continue
        x += pi
        last = i
        if u <= x:
            return i
    return last
