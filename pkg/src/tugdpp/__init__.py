"""Dynamic programming principle for biased tug-of-war with running costs on finite setups."""

from .dpp import (
    ConvergenceTrace,
    DppProblem,
    Status,
    is_subsolution,
    is_supersolution,
    iterate_once,
    make_problem,
    residual,
    solve,
)
from .setups import AdmissibleSetup, LayerDecomposition, validate

__all__ = [
    "AdmissibleSetup",
    "ConvergenceTrace",
    "DppProblem",
    "LayerDecomposition",
    "Status",
    "is_subsolution",
    "is_supersolution",
    "iterate_once",
    "make_problem",
    "residual",
    "solve",
    "validate",
]
