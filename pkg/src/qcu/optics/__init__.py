"""Linear-optical c-phase gates: post-selected model and success-probability search."""

from .model import (
    CPhaseSpec,
    ModeTransfer,
    cascade_success,
    cphase_residual,
    postselected_map,
)
from .search import (
    OptimizerOptions,
    SuccessCurve,
    SuccessReport,
    midpoint_grid,
    optimize_cphase,
    success_curve,
)

__all__ = [
    "CPhaseSpec",
    "ModeTransfer",
    "OptimizerOptions",
    "SuccessCurve",
    "SuccessReport",
    "cascade_success",
    "cphase_residual",
    "midpoint_grid",
    "optimize_cphase",
    "postselected_map",
    "success_curve",
]
