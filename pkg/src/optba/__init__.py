"""Bees Algorithm hyperparameter optimization over integer grids."""

from .engine import BAConfig, BeesAlgorithm, StoppingCriteria, run, validate
from .errors import (
    ChildExited,
    ConstructionUnverifiable,
    DimensionMismatch,
    EvalTimeout,
    InvalidConfig,
    NeighborhoodEmpty,
    ObjectiveFailure,
    ProtocolError,
    SpaceTooLarge,
)
from .objectives import DEFAULT_SPACE, ObjectiveSpec, build_objective
from .space import ParamDomain, ParamSpace, enumerate_grid, neighbor, sample_uniform
from .trace import Candidate, RunTrace

__version__ = "0.1.0"

__all__ = [
    "BAConfig", "BeesAlgorithm", "StoppingCriteria", "run", "validate",
    "ChildExited", "ConstructionUnverifiable", "DimensionMismatch", "EvalTimeout", "InvalidConfig",
    "NeighborhoodEmpty", "ObjectiveFailure", "ProtocolError", "SpaceTooLarge",
    "DEFAULT_SPACE", "ObjectiveSpec", "build_objective",
    "ParamDomain", "ParamSpace", "enumerate_grid", "neighbor", "sample_uniform",
    "Candidate", "RunTrace",
]
