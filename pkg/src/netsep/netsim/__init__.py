"""Network model and execution engine."""

from .config import load_network, network_from_config
from .engine import (
    DecodeContext,
    EncodeContext,
    FunctionCode,
    NodeCode,
    NoiselessTransport,
    PipeTransport,
    ReplicaCode,
    RunResult,
    StackedRun,
    UnraveledCode,
    UnraveledPlan,
    cumulative_quota,
    draw_sources,
    fold_unraveled,
    measure_distortion,
    per_letter_distortion,
    pipe_budget,
    run_network,
    runs_identical,
    stack,
    unravel,
)
from .model import (
    AwgnLink,
    BitPipe,
    Demand,
    DistortionMatrix,
    Edge,
    NetworkSpec,
    SourceLaw,
    bit_pipe_equivalent,
    edge_capacity,
)
from .trace import write_trace

__all__ = [
    "AwgnLink",
    "BitPipe",
    "DecodeContext",
    "Demand",
    "DistortionMatrix",
    "Edge",
    "EncodeContext",
    "FunctionCode",
    "NetworkSpec",
    "NodeCode",
    "NoiselessTransport",
    "PipeTransport",
    "ReplicaCode",
    "RunResult",
    "SourceLaw",
    "StackedRun",
    "UnraveledCode",
    "UnraveledPlan",
    "bit_pipe_equivalent",
    "cumulative_quota",
    "draw_sources",
    "edge_capacity",
    "fold_unraveled",
    "load_network",
    "measure_distortion",
    "network_from_config",
    "per_letter_distortion",
    "pipe_budget",
    "run_network",
    "runs_identical",
    "stack",
    "unravel",
    "write_trace",
]
