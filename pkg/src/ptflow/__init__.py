"""Proper-time RG flows for the quantum double well and their exact cross-checks."""

from .exact_solver import EigenConfig, EigenResult, schrodinger_gap
from .flow_integrator import (
    FlowAbortError,
    FlowDiagnostics,
    FlowResult,
    FlowState,
    SteppingConfig,
    SweepPoint,
    Termination,
    initialize,
    integrate,
    sweep_m,
)
from .flow_rhs import (
    PointData,
    PositivityViolation,
    SchemeKind,
    SchemeSpec,
    alpha,
    rhs_pt_inf,
    rhs_pt_m,
    rhs_wh,
)
from .instanton import instanton_gap
from .model import (
    ModelParams,
    SpatialGrid,
    bare_potential,
    classical_minima,
    default_grid,
)
from .observables import GapEstimate, gap_from_flow
from .stencil import Field, derivative

__all__ = [
    "EigenConfig",
    "EigenResult",
    "Field",
    "FlowAbortError",
    "FlowDiagnostics",
    "FlowResult",
    "FlowState",
    "GapEstimate",
    "ModelParams",
    "PointData",
    "PositivityViolation",
    "SchemeKind",
    "SchemeSpec",
    "SpatialGrid",
    "SteppingConfig",
    "SweepPoint",
    "Termination",
    "alpha",
    "bare_potential",
    "classical_minima",
    "default_grid",
    "derivative",
    "gap_from_flow",
    "initialize",
    "instanton_gap",
    "integrate",
    "rhs_pt_inf",
    "rhs_pt_m",
    "rhs_wh",
    "schrodinger_gap",
    "sweep_m",
]

__version__ = "0.1.0"
