"""Step-duration replanning for a linear inverted pendulum walking model."""

from ._lipreplan import (
    MIN_HORIZON,
    PLAN_TOLERANCE,
    BoundaryStateError,
    FeasibilityChecker,
    InfeasibleGuess,
    closed_loop,
    config_hash,
    default_config,
    fig1,
    in_j,
    propagate,
    region,
    replan,
    t_structure,
)

__all__ = [
    "MIN_HORIZON",
    "PLAN_TOLERANCE",
    "BoundaryStateError",
    "FeasibilityChecker",
    "InfeasibleGuess",
    "closed_loop",
    "config_hash",
    "default_config",
    "fig1",
    "in_j",
    "propagate",
    "region",
    "replan",
    "t_structure",
]
