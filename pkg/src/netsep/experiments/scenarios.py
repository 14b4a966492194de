"""Reference networks and hand-built node codes for the bundled scenarios.

Codes for the bit-pipe network compute their whole message at every
time step from the node's source and slice out the bits due now, so
they are stateless and work under both pipe schedules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..channels import Dmc, bsc
from ..codecs import BinningCode, RdCodebook, TypicalSetCode, build_binning_code, build_rd_code, rd_decode, rd_encode, sw_bins, sw_decode
from ..coding_theorems import DistortionMeasure
from ..errors import ContractViolation, InvalidArgument
from ..info_core import Pmf
from ..netsim import (
    BitPipe,
    DecodeContext,
    Demand,
    Edge,
    EncodeContext,
    NetworkSpec,
    SourceLaw,
    pipe_budget,
)


def dsbs(rho: float) -> np.ndarray:
    """Joint pmf of a doubly symmetric binary source with flip probability ``rho``."""
    if not 0 <= rho <= 1:
        raise InvalidArgument("rho must lie in [0, 1]")
    return np.array([[1 - rho, rho], [rho, 1 - rho]]) / 2


def point_to_point(channel, source: np.ndarray, measure: DistortionMeasure | None = None,
                   lossless: bool = False, name: str = "p2p") -> NetworkSpec:
    src = np.asarray(source, dtype=float)
    m = measure or DistortionMeasure.hamming(src.size)
    return NetworkSpec(
        ("s", "d"),
        (Edge("e", "s", "d", channel),),
        SourceLaw(("s",), src),
        (Demand("s", "d", m, lossless=lossless),),
        name,
    )


def two_sources_one_sink(ch1, ch2, joint: np.ndarray, lossless: bool = True, name: str = "fig2") -> NetworkSpec:
    """Nodes 1 and 2 observe correlated sources; node 3 wants both."""
    j = np.asarray(joint, dtype=float)
    h1 = DistortionMeasure.hamming(j.shape[0])
    h2 = DistortionMeasure.hamming(j.shape[1])
    return NetworkSpec(
        ("1", "2", "3"),
        (Edge("e1", "1", "3", ch1), Edge("e2", "2", "3", ch2)),
        SourceLaw(("1", "2"), j),
        (Demand("1", "3", h1, lossless=lossless), Demand("2", "3", h2, lossless=lossless)),
        name,
    )


def fig2_noisy(crossover: float = 0.1, rho: float = 0.1) -> NetworkSpec:
    return two_sources_one_sink(bsc(crossover), bsc(crossover), dsbs(rho))


# --------------------------------------------------------------------------
# Bit helpers (most significant bit first)


def ints_to_bits(values: np.ndarray, width: int) -> np.ndarray:
    v = np.asarray(values, dtype=np.int64)
    if width == 0:
        return np.zeros(v.shape + (0,), dtype=np.uint8)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((v[..., None] >> shifts) & 1).astype(np.uint8)


def bits_to_ints(bits: np.ndarray) -> np.ndarray:
    b = np.asarray(bits, dtype=np.int64)
    width = b.shape[-1]
    if width > 62:
        raise InvalidArgument("at most 62 bits fit in one integer")
    weights = np.left_shift(1, np.arange(width - 1, -1, -1, dtype=np.int64))
    return (b * weights).sum(axis=-1)


def symbol_width(alphabet_size: int) -> int:
    return max(1, math.ceil(math.log2(alphabet_size)))


# --------------------------------------------------------------------------
# Generic pipe codes


class PipeMessageEncoder:
    """Source node that sends a ``(T, B)`` message on one pipe, in the quanta the engine asks for."""

    def __init__(self, edge: str, message):
        self.edge = edge
        self.message = message

    def encode(self, ctx: EncodeContext) -> dict[str, np.ndarray]:
        budget = ctx.pipe_bits[self.edge]
        msg = np.asarray(self.message(ctx.source, budget), dtype=np.uint8)
        if msg.shape != (ctx.trials, budget):
            raise ContractViolation(f"message for {self.edge} must have {budget} bits")
        s = ctx.sent[self.edge]
        return {self.edge: msg[:, s : s + ctx.quota[self.edge]]}

    def decode(self, ctx: DecodeContext) -> dict[str, np.ndarray]:
        return {}


def raw_message(alphabet_size: int):
    """Message that lists every source symbol in fixed-width binary."""
    w = symbol_width(alphabet_size)

    def message(source: np.ndarray, budget: int) -> np.ndarray:
        T = source.shape[0]
        bits = ints_to_bits(source.reshape(T, -1), w).reshape(T, -1)
        if bits.shape[1] > budget:
            raise ContractViolation(f"raw message needs {bits.shape[1]} bits, pipe carries {budget}")
        out = np.zeros((T, budget), dtype=np.uint8)
        out[:, : bits.shape[1]] = bits
        return out

    return message


def raw_unpack(bits: np.ndarray, alphabet_size: int, shape: tuple[int, ...]) -> np.ndarray:
    w = symbol_width(alphabet_size)
    count = int(np.prod(shape[1:]))
    vals = bits_to_ints(bits[:, : count * w].reshape(shape[0], count, w))
    return np.minimum(vals, alphabet_size - 1).reshape(shape)


# --------------------------------------------------------------------------
# Point-to-point lossy code


@dataclass
class RdPipeScheme:
    """Random rate-distortion code over the ``N L`` letters of all layers."""

    codebook: RdCodebook
    edge: str = "e"
    source_node: str = "s"
    sink: str = "d"

    def codes(self) -> dict:
        cb = self.codebook

        def message(source, budget):
            if cb.bits > budget:
                raise ContractViolation(f"rate-distortion code needs {cb.bits} bits, pipe carries {budget}")
            T = source.shape[0]
            idx = rd_encode(cb, source.reshape(T, -1))
            out = np.zeros((T, budget), dtype=np.uint8)
            out[:, : cb.bits] = ints_to_bits(idx, cb.bits)
            return out

        return {self.source_node: PipeMessageEncoder(self.edge, message), self.sink: _RdDecoder(self)}


class _RdDecoder:
    def __init__(self, scheme: RdPipeScheme):
        self.s = scheme

    def encode(self, ctx):
        return {}

    def decode(self, ctx: DecodeContext) -> dict[str, np.ndarray]:
        cb = self.s.codebook
        bits = ctx.received[self.s.edge][:, : cb.bits]
        words = rd_decode(cb, bits_to_ints(bits))
        T = ctx.trials
        return {self.s.source_node: words.reshape(T, ctx.layers, -1)}


def rd_pipe_scheme(source: np.ndarray, measure: DistortionMeasure, bits: int, letters: int, seed: int) -> RdPipeScheme:
    cb = build_rd_code(Pmf(np.asarray(source, dtype=float)), measure, bits, letters, seed)
    return RdPipeScheme(cb)


@dataclass
class TypicalSetPipeScheme:
    """Lossless fixed-rate code: the index of the block in the typical set.

    Atypical blocks are sent as index 0, so they decode to the first
    typical block and count as block errors.
    """

    code: TypicalSetCode
    edge: str = "e"
    source_node: str = "s"
    sink: str = "d"

    def codes(self) -> dict:
        tc = self.code

        def message(source, budget):
            if tc.bits > budget:
                raise ContractViolation(f"typical-set code needs {tc.bits} bits, pipe carries {budget}")
            T = source.shape[0]
            idx = np.array([tc.encode(row) for row in source.reshape(T, -1)], dtype=np.int64)
            out = np.zeros((T, budget), dtype=np.uint8)
            out[:, : tc.bits] = ints_to_bits(idx, tc.bits)
            return out

        def decode(ctx: DecodeContext) -> dict[str, np.ndarray]:
            idx = bits_to_ints(ctx.received[self.edge][:, : tc.bits])
            words = np.stack([tc.decode(int(min(i, tc.count - 1))) for i in idx])
            return {self.source_node: words.reshape(ctx.trials, ctx.layers, -1)}

        return {self.source_node: PipeMessageEncoder(self.edge, message), self.sink: _Decoder(decode)}


@dataclass
class _Decoder:
    fn: object

    def encode(self, ctx):
        return {}

    def decode(self, ctx):
        return self.fn(ctx)


def typical_set_scheme(source: np.ndarray, letters: int, epsilon: float) -> TypicalSetPipeScheme:
    return TypicalSetPipeScheme(TypicalSetCode(Pmf(np.asarray(source, dtype=float)), letters, epsilon))


# --------------------------------------------------------------------------
# Two-encoder Slepian-Wolf code for the two-sources-one-sink network


@dataclass
class SlepianWolfScheme:
    """Node 1 and node 2 each send raw symbols or a random bin index.

    A node sends raw symbols when its pipe carries enough bits, and a bin
    index of the full pipe budget otherwise; the sink decodes a binned
    source with the other (raw) source as side information.  Binning both
    sources is rejected.
    """

    joint: np.ndarray
    budgets: dict[str, int]
    letters: int
    bins: dict[str, BinningCode]
    radius: int | None = None

    @property
    def raw(self) -> dict[str, bool]:
        return {k: k not in self.bins for k in ("1", "2")}

    def codes(self) -> dict:
        out = {}
        sizes = {"1": self.joint.shape[0], "2": self.joint.shape[1]}
        for node, edge in (("1", "e1"), ("2", "e2")):
            if node in self.bins:
                bc = self.bins[node]

                def message(source, budget, bc=bc):
                    T = source.shape[0]
                    out_bits = np.zeros((T, budget), dtype=np.uint8)
                    out_bits[:, : bc.bits] = ints_to_bits(sw_bins(bc, source.reshape(T, -1)), bc.bits)
                    return out_bits

                out[node] = PipeMessageEncoder(edge, message)
            else:
                out[node] = PipeMessageEncoder(edge, raw_message(sizes[node]))
        out["3"] = _SwDecoder(self)
        return out


class _SwDecoder:
    def __init__(self, scheme: SlepianWolfScheme):
        self.s = scheme

    def encode(self, ctx):
        return {}

    def decode(self, ctx: DecodeContext) -> dict[str, np.ndarray]:
        s = self.s
        T, N = ctx.trials, ctx.layers
        L = s.letters // N
        sizes = {"1": s.joint.shape[0], "2": s.joint.shape[1]}
        edges = {"1": "e1", "2": "e2"}
        out = {}
        for node in ("1", "2"):
            if s.raw[node]:
                out[node] = raw_unpack(ctx.received[edges[node]], sizes[node], (T, N, L))
        for node in ("1", "2"):
            if s.raw[node]:
                continue
            other = "2" if node == "1" else "1"
            bc = s.bins[node]
            joint = s.joint if node == "1" else s.joint.T
            bins = bits_to_ints(ctx.received[edges[node]][:, : bc.bits])
            side = out[other].reshape(T, -1)
            guess = np.empty((T, s.letters), dtype=np.int64)
            for i in range(T):
                res = sw_decode(bc, int(bins[i]), side[i], joint, method="ml", radius=s.radius)
                guess[i] = res.sequence if res.ok else _map_guess(joint, side[i])
            out[node] = guess.reshape(T, N, L)
        return out


def _map_guess(joint: np.ndarray, side: np.ndarray) -> np.ndarray:
    # fallback reconstruction after a decoding failure: per-letter MAP
    return np.argmax(joint[:, side], axis=0).astype(np.int64)


def slepian_wolf_scheme(
    joint: np.ndarray,
    capacities: dict[str, float],
    n: int,
    L: int,
    layers: int,
    seed: int,
    radius: int | None = None,
) -> SlepianWolfScheme:
    """Pick raw or binned transmission per node from the pipe budgets."""
    j = np.asarray(joint, dtype=float)
    letters = layers * L
    sizes = {"1": j.shape[0], "2": j.shape[1]}
    budgets = {k: pipe_budget(BitPipe(c), n, layers) for k, c in capacities.items()}
    bins = {}
    for node in ("1", "2"):
        need = letters * symbol_width(sizes[node])
        if budgets[node] < need:
            bins[node] = build_binning_code(budgets[node] / letters, letters, sizes[node], seed + int(node))
    if len(bins) == 2:
        raise InvalidArgument("binning both sources needs a joint decoder, which is not provided")
    return SlepianWolfScheme(j, budgets, letters, bins, radius)


# --------------------------------------------------------------------------
# Cross-layer repetition code for noisy networks


class RepetitionEncoder:
    """At round ``r`` layer ``l`` sends letter ``(r - 1) mod L`` of layer ``l - (r - 1)``.

    Every source letter is repeated over rounds and spread across layers,
    so the code genuinely acts across layers.
    """

    def __init__(self, edges: tuple[str, ...]):
        self.edges = edges

    def encode(self, ctx: EncodeContext) -> dict[str, np.ndarray]:
        r = ctx.t - 1
        L = ctx.source.shape[2]
        x = np.roll(ctx.source[:, :, r % L], r, axis=1)
        return {e: x for e in self.edges}

    def decode(self, ctx):
        return {}


class RepetitionDecoder:
    """Majority vote over the copies of each letter (smallest symbol on ties)."""

    def __init__(self, sources: dict[str, str], alphabet: dict[str, int], L: int):
        self.sources = sources  # source node -> incoming edge
        self.alphabet = alphabet
        self.L = L

    def encode(self, ctx):
        return {}

    def decode(self, ctx: DecodeContext) -> dict[str, np.ndarray]:
        T, N, L = ctx.trials, ctx.layers, self.L
        out = {}
        for node, edge in self.sources.items():
            y = ctx.received[edge]
            k = max(self.alphabet[node], int(y.max()) + 1 if y.size else 1)
            votes = np.zeros((T, N, L, k), dtype=np.int64)
            for r in range(ctx.n):
                back = np.roll(y[:, :, r], -r, axis=1)
                votes[:, :, r % L, :] += back[..., None] == np.arange(k)
            out[node] = np.minimum(np.argmax(votes, axis=-1), self.alphabet[node] - 1)
        return out


def repetition_codes(net: NetworkSpec, L: int) -> dict:
    """Repetition code for networks where every demand is served by a direct edge."""
    codes: dict = {}
    by_sink: dict[str, dict[str, str]] = {}
    for d in net.demands:
        direct = [e for e in net.edges if e.tail == d.source and e.head == d.sink]
        if not direct:
            raise InvalidArgument(f"demand {d.pair} has no direct edge")
        e = direct[0]
        if not isinstance(e.channel, Dmc) or e.channel.input_size < net.source.alphabet_size(d.source):
            raise InvalidArgument(f"edge {e.id} cannot carry the source alphabet of {d.source}")
        by_sink.setdefault(d.sink, {})[d.source] = e.id
    for node in net.nodes:
        outs = tuple(e.id for e in net.out_edges(node))
        if outs:
            codes[node] = RepetitionEncoder(outs)
    for sink, srcs in by_sink.items():
        dec = RepetitionDecoder(srcs, {s: net.source.alphabet_size(s) for s in srcs}, L)
        enc = codes.get(sink)
        codes[sink] = dec if enc is None else _Both(enc, dec)
    return codes


@dataclass
class _Both:
    enc: object
    dec: object

    def encode(self, ctx):
        return self.enc.encode(ctx)

    def decode(self, ctx):
        return self.dec.decode(ctx)


# --------------------------------------------------------------------------
# Uncoded transmission (the base code of the lossless patch)


class UncodedEncoder:
    """Sends letter ``t`` of its source at time ``t`` (needs ``n = L``)."""

    def __init__(self, edge: str):
        self.edge = edge

    def encode(self, ctx: EncodeContext) -> dict[str, np.ndarray]:
        if ctx.source.shape[2] != ctx.n:
            raise ContractViolation("uncoded transmission needs L = n")
        return {self.edge: ctx.source[:, :, ctx.t - 1]}

    def decode(self, ctx):
        return {}


class UncodedDecoder:
    """Reconstructs each source as the symbols received on its edge."""

    def __init__(self, sources: dict[str, str], alphabet: dict[str, int]):
        self.sources = sources
        self.alphabet = alphabet

    def encode(self, ctx):
        return {}

    def decode(self, ctx: DecodeContext) -> dict[str, np.ndarray]:
        return {
            node: np.minimum(np.asarray(ctx.received[edge], dtype=np.int64), self.alphabet[node] - 1)
            for node, edge in self.sources.items()
        }


def uncoded_codes(net: NetworkSpec) -> dict:
    codes: dict = {}
    by_sink: dict[str, dict[str, str]] = {}
    for d in net.demands:
        direct = [e for e in net.edges if e.tail == d.source and e.head == d.sink]
        if not direct:
            raise InvalidArgument(f"demand {d.pair} has no direct edge")
        by_sink.setdefault(d.sink, {})[d.source] = direct[0].id
    for node in net.nodes:
        outs = net.out_edges(node)
        if len(outs) == 1:
            codes[node] = UncodedEncoder(outs[0].id)
        elif outs:
            raise InvalidArgument(f"node {node} has several out-edges; uncoded transmission is ambiguous")
    for sink, srcs in by_sink.items():
        dec = UncodedDecoder(srcs, {s: net.source.alphabet_size(s) for s in srcs})
        codes[sink] = dec if sink not in codes else _Both(codes[sink], dec)
    return codes
