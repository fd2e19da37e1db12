"""Multiplayer War-style card games and sticky random walks on the discrete simplex."""

__version__ = "0.1.0"

from .core import (
    Composition,
    ContractError,
    RandomSource,
    RunConfig,
    SimSummary,
    derive_stream,
    sample_winner,
)

__all__ = [
    "Composition",
    "ContractError",
    "RandomSource",
    "RunConfig",
    "SimSummary",
    "derive_stream",
    "sample_winner",
]
