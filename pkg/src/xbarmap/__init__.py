"""Compile CNNs onto fixed-size RRAM crossbars and estimate their cycle counts."""

from .baseline import isaac_map
from .compiler import CompileResult, compile_network
from .duplication import (
    DuplicationInfeasible,
    DuplicationPlan,
    DuplicationProblem,
    lp_relaxation_bound,
    solve_duplication,
)
from .netir import (
    HWConfig,
    Layer,
    Network,
    NetworkError,
    ParseError,
    ShapeError,
    infer_shapes,
    layer_cycles,
    layer_matrix_dims,
    parse_hw,
    parse_network,
)
from .packing import PackingInfeasible, PackingPlan, Placement, pack, utilization
from .partition import LayerBox, partition_layer, partition_network
from .simulator import SimReport, SimulationConfigError, simulate, speedup

__version__ = "0.1.0"

__all__ = [
    "CompileResult", "DuplicationInfeasible", "DuplicationPlan", "DuplicationProblem", "HWConfig",
    "Layer", "LayerBox", "Network", "NetworkError", "PackingInfeasible", "PackingPlan", "ParseError",
    "Placement", "ShapeError", "SimReport", "SimulationConfigError", "compile_network", "infer_shapes",
    "isaac_map", "layer_cycles", "layer_matrix_dims", "lp_relaxation_bound", "pack", "parse_hw",
    "parse_network", "partition_layer", "partition_network", "simulate", "solve_duplication", "speedup",
    "utilization",
]
