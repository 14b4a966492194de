"""Reproducible experiments on top of the simulator: scenarios, pipelines, manifests and the CLI."""

from .manifest import load_manifest, parse_manifest
from .patch import LosslessPatchPlan, PatchReport, plan_lossless_patch, run_lossless_patch
from .probes import SweepCell, run_awgn_sweep, run_emulation_probe
from .scenarios import (
    dsbs,
    fig2_noisy,
    point_to_point,
    rd_pipe_scheme,
    repetition_codes,
    slepian_wolf_scheme,
    two_sources_one_sink,
    typical_set_scheme,
    uncoded_codes,
)
from .separation import ChannelCodedTransport, SeparationPlan, SeparationReport, link_dmc, run_separated

__all__ = [
    "ChannelCodedTransport",
    "LosslessPatchPlan",
    "PatchReport",
    "SeparationPlan",
    "SeparationReport",
    "SweepCell",
    "dsbs",
    "fig2_noisy",
    "link_dmc",
    "load_manifest",
    "parse_manifest",
    "plan_lossless_patch",
    "point_to_point",
    "rd_pipe_scheme",
    "repetition_codes",
    "run_awgn_sweep",
    "run_emulation_probe",
    "run_lossless_patch",
    "run_separated",
    "slepian_wolf_scheme",
    "two_sources_one_sink",
    "typical_set_scheme",
    "uncoded_codes",
]
