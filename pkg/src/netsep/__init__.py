"""netsep: numerical experiments on source-channel separation in networks of noisy links.

Subpackages:

* ``info_core``: pmfs, entropies, robust typicality;
* ``channels``: DMCs, AWGN links and their quantized versions;
* ``coding_theorems``: Blahut-Arimoto capacity and rate-distortion;
* ``codecs``: random channel, source, emulation and binning codes;
* ``netsim``: network model, execution engine, stacking and unraveling;
* ``experiments``: the end-to-end pipelines and the ``netsep`` CLI.
"""

from .channels import (
    AwgnSpec,
    Dmc,
    Quantizer,
    awgn_capacity,
    bec,
    bsc,
    discretize_awgn,
    dmc_transmit,
    identity_channel,
    quantize,
    symmetric_channel,
)
from .coding_theorems import (
    CapacityResult,
    DistortionMeasure,
    RdResult,
    ba_capacity,
    ba_rate_distortion,
    f_epsilon,
    separation_frontier,
)
from .errors import (
    ContractViolation,
    ConvergenceFailure,
    InvalidArgument,
    NetsepError,
    PlanInfeasible,
    ResourceLimit,
)
from .info_core import (
    JointPmf,
    Pmf,
    binary_entropy,
    conditional_entropy,
    empirical,
    entropy,
    is_jointly_typical,
    is_typical,
    joint_empirical,
    mutual_information,
    total_variation,
)
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "AwgnSpec",
    "CapacityResult",
    "ContractViolation",
    "ConvergenceFailure",
    "DistortionMeasure",
    "Dmc",
    "InvalidArgument",
    "JointPmf",
    "NetsepError",
    "PlanInfeasible",
    "Pmf",
    "Quantizer",
    "RdResult",
    "ResourceLimit",
    "RngStream",
    "awgn_capacity",
    "ba_capacity",
    "ba_rate_distortion",
    "bec",
    "binary_entropy",
    "bsc",
    "conditional_entropy",
    "discretize_awgn",
    "dmc_transmit",
    "empirical",
    "entropy",
    "f_epsilon",
    "identity_channel",
    "is_jointly_typical",
    "is_typical",
    "joint_empirical",
    "mutual_information",
    "quantize",
    "separation_frontier",
    "symmetric_channel",
    "total_variation",
]
