"""Driver/coach agent alignment sandbox.

The compiled extension carries the simulator, agents, metrics and
analytics; this package re-exports its public surface.
"""

from ._core import (  # noqa: F401
    ShortTermMemory,
    avg_excluding_zero,
    build_matrix,
    classify_driver_style,
    mdsi_style_score,
    parse_driver_response,
    pearson,
    per_minute_segments,
    run_condition,
    token_to_timestep,
)

__all__ = [
    "ShortTermMemory",
    "avg_excluding_zero",
    "build_matrix",
    "classify_driver_style",
    "mdsi_style_score",
    "parse_driver_response",
    "pearson",
    "per_minute_segments",
    "run_condition",
    "token_to_timestep",
]

__version__ = "0.1.0"
