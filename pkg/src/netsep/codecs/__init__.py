"""Random-coding constructions: channel codes, emulation codes, binning."""

from .binning import (
    BinningCode,
    SwDecodeResult,
    build_binning_code,
    sw_bins,
    sw_decode,
    sw_encode,
)
from .channel_code import (
    MAX_MESSAGE_BITS,
    ChannelCodebook,
    MaxErrorEstimate,
    bhattacharyya_max_error_bound,
    build_channel_code,
    channel_decode,
    channel_decode_batch,
    channel_encode,
    estimate_max_error,
    message_bits,
    sample_iid,
    transmit_codewords,
)
from .emulation import (
    EmulationCodebook,
    FidelityStats,
    build_emulation_code,
    emulate_decode,
    emulate_encode,
    emulate_encode_status,
    emulation_fidelity,
    ensemble_emulate,
)
from .source_code import RdCodebook, TypicalSetCode, build_rd_code, rd_decode, rd_encode

__all__ = [
    "BinningCode",
    "ChannelCodebook",
    "EmulationCodebook",
    "FidelityStats",
    "MAX_MESSAGE_BITS",
    "MaxErrorEstimate",
    "RdCodebook",
    "SwDecodeResult",
    "TypicalSetCode",
    "bhattacharyya_max_error_bound",
    "build_binning_code",
    "build_channel_code",
    "build_emulation_code",
    "build_rd_code",
    "channel_decode",
    "channel_decode_batch",
    "channel_encode",
    "emulate_decode",
    "emulate_encode",
    "emulate_encode_status",
    "emulation_fidelity",
    "ensemble_emulate",
    "estimate_max_error",
    "message_bits",
    "rd_decode",
    "rd_encode",
    "sample_iid",
    "sw_bins",
    "sw_decode",
    "sw_encode",
    "transmit_codewords",
]
