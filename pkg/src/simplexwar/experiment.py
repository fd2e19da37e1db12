"""Run a RunConfig on the right engine and package the result as a manifest."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .core import ContractError, RunConfig, SimSummary
from .stats import histogram_rows


@dataclass
class ExperimentManifest:
    config: RunConfig
    summary: SimSummary
    tool_version: str = __version__
    wall_time: float = 0.0
    bounds: tuple[float, float] | None = None
    exact: float | None = None

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "tool_version": self.tool_version,
            "wall_time": self.wall_time,
            "summary": self.summary.to_dict(),
            "bounds": list(self.bounds) if self.bounds is not None else None,
            "exact": self.exact,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write(self, path) -> None:
        Path(path).write_text(self.dumps() + "\n", encoding="utf-8")


def load_manifest_config(path) -> RunConfig:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return RunConfig.from_dict(data["config"])


def simulate(config: RunConfig, rule=None, f=None) -> SimSummary:
    if config.variant == "sticky_walk":
        from .sticky_walk import run_walk

        return run_walk(config)
    if config.variant == "pwar":
        from .pwar import run_pwar

        return run_pwar(config, rule)
    if config.variant == "fwar":
        from .fwar import run_fwar

        return run_fwar(config, f)
    if config.variant == "standard_war":
        from .standard_war import run_standard_war

        return run_standard_war(config)
    raise ContractError(f"unknown variant {config.variant!r}")


def run_experiment(config: RunConfig, exact: bool = False, rule=None, f=None) -> ExperimentManifest:
    """Simulate, attach bounds for walk-like variants, and optionally the exact value."""
    from .sticky_walk import exact_expected_absorption, theorem_bounds

    t0 = time.perf_counter()
    summary = simulate(config, rule, f)
    bounds = exact_value = None
    if config.variant in ("sticky_walk", "pwar"):
        bounds = theorem_bounds(config.start)
        if exact:
            exact_value = exact_expected_absorption(config.start, tolerance=1e-12).expected_time
    return ExperimentManifest(
        config, summary, wall_time=time.perf_counter() - t0, bounds=bounds, exact=exact_value
    )


def summary_csv(summary: SimSummary) -> str:
    return summary.csv_header() + "\n" + summary.csv_row() + "\n"


def histogram_csv(summary: SimSummary) -> str:
    lines = ["bin_lower,bin_upper,count"]
    lines += [f"{lo},{hi},{c}" for lo, hi, c in histogram_rows(summary)]
    return "\n".join(lines) + "\n"
