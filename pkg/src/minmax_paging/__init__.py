"""Min-max paging toolkit: fractional primal-dual solver, rounding, offline references and adversaries."""

from .trace import (
    CostVector,
    MalformedTraceError,
    RequestTrace,
    build_request_index,
    constraint_row,
    lq_cost,
    minmax_cost,
    read_trace,
    write_trace,
)
from .objectives import ConvexObjective, SolverParams, default_params, parse_objective
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConvexObjective",
    "CostVector",
    "MalformedTraceError",
    "RequestTrace",
    "SolverParams",
    "build_request_index",
    "constraint_row",
    "default_params",
    "lq_cost",
    "minmax_cost",
    "parse_objective",
    "read_trace",
    "write_trace",
]
