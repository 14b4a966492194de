"""Synchronous execution of network codes, stacking and unraveling.

Everything is vectorized over Monte Carlo trials.  Per-node arrays carry
a leading trial axis ``T`` and a layer axis ``N`` (``N = 1`` for a plain
network): sources are ``(T, N, L)``, channel symbols on noisy edges are
``(T, N, n)``.  Pipe edges carry a flat ``(T, B)`` bit string pooled over
layers, with ``B = floor(N n C)``.

Randomness layout (the seed remapping used by ``unravel``):

* sources of trial ``i``: stream ``path + ("source", i)``, ``N L`` draws
  in row-major ``[layer, letter]`` order;
* noise on edge ``e`` in trial ``i``: stream ``path + ("noise", e, i)``,
  ``n N`` draws in row-major ``[time, layer]`` order.

A single-layer run of blocklength ``n N`` reads the same flat arrays, so
draw ``(r - 1) N + l`` feeds layer ``l`` at time ``r`` in the stacked run
and time ``(r - 1) N + l`` in the unraveled one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Protocol

import numpy as np

from ..channels import transmit_with_uniforms
from ..coding_theorems import DistortionMeasure
from ..errors import ContractViolation, InvalidArgument
from ..rng import RngStream
from .model import AwgnLink, BitPipe, DistortionMatrix, Edge, NetworkSpec, PIPE_SLACK

SCHEDULES = ("quanta", "end")


def pipe_budget(pipe: BitPipe, n: int, layers: int) -> int:
    """Bits a pipe carries over ``n`` uses in each of ``layers`` copies, pooled."""
    return int(math.floor(layers * n * pipe.capacity + PIPE_SLACK))


def cumulative_quota(budget: int, n: int, t: int) -> int:
    """Bits due by the end of time ``t`` when ``budget`` bits are spread over ``n`` times."""
    return (t * budget) // n


def _readonly(a: np.ndarray) -> np.ndarray:
    v = a.view()
    v.flags.writeable = False
    return v


@dataclass(frozen=True)
class EncodeContext:
    """What node ``node`` may see when choosing its inputs at time ``t``.

    ``received`` maps each incoming edge to outputs with time index ``< t``:
    ``(T, N, t - 1)`` symbols for noisy edges, or the bits delivered so far
    ``(T, b)`` for pipes.  ``quota[e]`` is the number of bits pipe ``e`` must
    carry at time ``t`` and ``sent[e]`` the number already sent.
    """

    node: str
    t: int
    n: int
    layers: int
    source: np.ndarray
    received: Mapping[str, np.ndarray]
    quota: Mapping[str, int]
    sent: Mapping[str, int]
    pipe_bits: Mapping[str, int]

    @property
    def trials(self) -> int:
        return int(self.source.shape[0])


@dataclass(frozen=True)
class DecodeContext:
    """End-of-block view of node ``node``: all ``n`` outputs and its own source."""

    node: str
    n: int
    layers: int
    source: np.ndarray
    received: Mapping[str, np.ndarray]
    pipe_bits: Mapping[str, int]

    @property
    def trials(self) -> int:
        return int(self.source.shape[0])


class NodeCode(Protocol):
    def encode(self, ctx: EncodeContext) -> dict[str, np.ndarray]: ...

    def decode(self, ctx: DecodeContext) -> dict[str, np.ndarray]: ...


@dataclass
class FunctionCode:
    """A node code assembled from two plain functions."""

    encoder: Callable[[EncodeContext], dict] | None = None
    decoder: Callable[[DecodeContext], dict] | None = None

    def encode(self, ctx: EncodeContext) -> dict[str, np.ndarray]:
        return {} if self.encoder is None else self.encoder(ctx)

    def decode(self, ctx: DecodeContext) -> dict[str, np.ndarray]:
        return {} if self.decoder is None else self.decoder(ctx)


class PipeTransport(Protocol):
    """Carries the bits a pipe edge sends at one time step."""

    def deliver(self, edge: Edge, t: int, bits: np.ndarray, trial_ids: np.ndarray) -> np.ndarray: ...


class NoiselessTransport:
    def deliver(self, edge: Edge, t: int, bits: np.ndarray, trial_ids: np.ndarray) -> np.ndarray:
        return bits.copy()


@dataclass
class RunResult:
    net: NetworkSpec
    n: int
    L: int
    layers: int
    schedule: str
    sources: dict[str, np.ndarray]
    reconstructions: dict[tuple[str, str], np.ndarray]
    inputs: dict[str, np.ndarray]
    outputs: dict[str, np.ndarray]
    pipe_sent: dict[str, np.ndarray]
    pipe_received: dict[str, np.ndarray]
    per_layer: dict[tuple[str, str], np.ndarray] = field(default_factory=dict)

    @property
    def trials(self) -> int:
        return next(iter(self.sources.values())).shape[0] if self.sources else 0

    def per_trial(self, pair: tuple[str, str]) -> np.ndarray:
        """Distortion of each trial, averaged over layers and letters."""
        return self.per_layer[pair].mean(axis=1)

    def distortion_matrix(self) -> DistortionMatrix:
        """Mean distortion per demand, from pair counts pooled over trials, layers and letters."""
        out = {}
        for d in self.net.demands:
            u = self.sources[d.source].reshape(1, -1)
            out[d.pair] = float(per_letter_distortion(u, self.reconstructions[d.pair].reshape(1, -1), d.measure)[0])
        return DistortionMatrix(out)

    def block_errors(self, pair: tuple[str, str]) -> np.ndarray:
        """Per-trial flag: the whole ``N L`` block was not recovered exactly."""
        u = self.sources[pair[0]]
        return np.any(self.reconstructions[pair] != u, axis=(1, 2))


# --------------------------------------------------------------------------
# Distortion accounting


def per_letter_distortion(u: np.ndarray, uhat: np.ndarray, measure: DistortionMeasure) -> np.ndarray:
    """Average distortion over the last axis, from exact symbol-pair counts."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(uhat, dtype=np.int64)
    if u.shape != v.shape:
        raise InvalidArgument(f"source shape {u.shape} != reconstruction shape {v.shape}")
    ku, kv = measure.table.shape
    if u.size and (u.min() < 0 or u.max() >= ku or v.min() < 0 or v.max() >= kv):
        raise InvalidArgument("symbol outside the distortion table")
    L = u.shape[-1]
    if L == 0:
        raise InvalidArgument("empty blocks have no distortion")
    lead = u.shape[:-1]
    rows = int(np.prod(lead, dtype=np.int64))
    cell = (u * kv + v).reshape(rows, L)
    offs = (np.arange(rows, dtype=np.int64) * (ku * kv))[:, None]
    counts = np.bincount((cell + offs).ravel(), minlength=rows * ku * kv).reshape(rows, ku * kv)
    # integer counts make the result independent of letter order
    return (counts @ measure.table.ravel() / L).reshape(lead)


def measure_distortion(
    sources: Mapping[str, np.ndarray],
    reconstructions: Mapping[tuple[str, str], np.ndarray],
    measures: Mapping[tuple[str, str], DistortionMeasure],
) -> DistortionMatrix:
    """Empirical mean per-letter distortion for every demanded pair."""
    out = {}
    for pair, measure in measures.items():
        if pair not in reconstructions:
            raise InvalidArgument(f"no reconstruction for demand {pair}")
        u = np.asarray(sources[pair[0]])
        v = np.asarray(reconstructions[pair])
        if u.shape != v.shape:
            raise InvalidArgument(f"length mismatch for demand {pair}: {u.shape} vs {v.shape}")
        out[pair] = float(per_letter_distortion(u.reshape(1, -1), v.reshape(1, -1), measure)[0])
    return DistortionMatrix(out)


# --------------------------------------------------------------------------
# Randomness


def draw_sources(net: NetworkSpec, L: int, layers: int, rng: RngStream, trial_ids) -> dict[str, np.ndarray]:
    law = net.source
    flat = law.probs.ravel()
    cum = np.cumsum(flat)
    cum[-1] = 1.0
    shape = law.probs.shape
    draws = np.empty((len(trial_ids), layers * L), dtype=np.int64)
    for row, i in enumerate(trial_ids):
        u = rng.child("source", int(i)).uniform(layers * L)
        draws[row] = np.minimum(np.searchsorted(cum, u, side="right"), flat.size - 1)
    parts = np.unravel_index(draws, shape) if shape else ()
    out = {}
    for node in net.nodes:
        if node in law.nodes:
            out[node] = parts[law.nodes.index(node)].reshape(len(trial_ids), layers, L).astype(np.int64)
        else:
            out[node] = np.zeros((len(trial_ids), layers, L), dtype=np.int64)
    return out


def _edge_noise(edge: Edge, n: int, layers: int, rng: RngStream, trial_ids) -> np.ndarray:
    out = np.empty((len(trial_ids), n, layers))
    stream = rng.child("noise", edge.id)
    for row, i in enumerate(trial_ids):
        s = stream.child(int(i))
        out[row] = (s.normal((n, layers)) if isinstance(edge.channel, AwgnLink) else s.uniform((n, layers)))
    return out


# --------------------------------------------------------------------------
# The engine


def _check_inputs(edge: Edge, x, trials: int, layers: int, quota: int) -> np.ndarray:
    ch = edge.channel
    a = np.asarray(x)
    if isinstance(ch, BitPipe):
        if a.shape != (trials, quota):
            raise ContractViolation(f"pipe {edge.id} expects {(trials, quota)} bits, got {a.shape}")
        if a.size and not np.all((a == 0) | (a == 1)):
            raise ContractViolation(f"pipe {edge.id} carries bits only")
        return a.astype(np.uint8)
    if a.shape != (trials, layers):
        raise ContractViolation(f"edge {edge.id} expects inputs of shape {(trials, layers)}, got {a.shape}")
    if isinstance(ch, AwgnLink):
        a = a.astype(float)
        if not np.all(np.isfinite(a)):
            raise ContractViolation(f"edge {edge.id} got a non-finite input")
        return a
    if not np.issubdtype(a.dtype, np.integer):
        if not np.all(a == np.round(a)):
            raise ContractViolation(f"edge {edge.id} needs integer symbols")
    a = a.astype(np.int64)
    if a.size and (a.min() < 0 or a.max() >= ch.input_size):
        raise ContractViolation(f"edge {edge.id} input outside its alphabet")
    return a


def run_network(
    net: NetworkSpec,
    codes: Mapping[str, NodeCode],
    *,
    n: int,
    L: int,
    rng: RngStream,
    trials: int = 1,
    layers: int = 1,
    schedule: str = "quanta",
    transport: PipeTransport | None = None,
    sources: Mapping[str, np.ndarray] | None = None,
    first_trial: int = 0,
) -> RunResult:
    """Run one coding cycle of ``n`` network uses on ``trials`` independent realizations.

    Nodes without a code send the all-zero input.  ``schedule`` controls
    when pipe bits become visible: ``"quanta"`` exposes the bits sent at
    time ``t`` from time ``t + 1`` on; ``"end"`` only at decoding time.
    """
    if n < 1 or L < 1 or layers < 1:
        raise InvalidArgument("n, L and layers must be positive")
    if schedule not in SCHEDULES:
        raise InvalidArgument(f"schedule must be one of {SCHEDULES}")
    unknown = set(codes) - set(net.nodes)
    if unknown:
        raise InvalidArgument(f"codes given for unknown nodes {sorted(unknown)}")
    transport = transport or NoiselessTransport()

    if sources is None:
        if trials < 1:
            raise InvalidArgument("trials must be >= 1")
        trial_ids = np.arange(first_trial, first_trial + trials)
        src = draw_sources(net, L, layers, rng, trial_ids)
    else:
        src = {}
        for node in net.nodes:
            if node in sources:
                src[node] = np.asarray(sources[node], dtype=np.int64)
        if not src:
            raise InvalidArgument("source override is empty")
        trials = next(iter(src.values())).shape[0]
        for node in net.nodes:
            src.setdefault(node, np.zeros((trials, layers, L), dtype=np.int64))
            if src[node].shape != (trials, layers, L):
                raise InvalidArgument(f"source of {node} must have shape {(trials, layers, L)}")
        trial_ids = np.arange(first_trial, first_trial + trials)
    src = {k: _readonly(v) for k, v in src.items()}

    T = trials
    budgets = {e.id: pipe_budget(e.channel, n, layers) for e in net.edges if e.is_pipe}
    budgets_view = MappingProxyType(budgets)
    noise = {e.id: _edge_noise(e, n, layers, rng, trial_ids) for e in net.edges if not e.is_pipe}
    xs = {e.id: np.zeros((T, layers, n), dtype=float if isinstance(e.channel, AwgnLink) else np.int64)
          for e in net.edges if not e.is_pipe}
    ys = {e.id: np.zeros_like(xs[e.id]) for e in net.edges if not e.is_pipe}
    sent = {k: np.zeros((T, b), dtype=np.uint8) for k, b in budgets.items()}
    got = {k: np.zeros((T, b), dtype=np.uint8) for k, b in budgets.items()}

    def visible(edge: Edge, t: int) -> np.ndarray:
        if not edge.is_pipe:
            return _readonly(ys[edge.id][:, :, : t - 1])
        b = cumulative_quota(budgets[edge.id], n, t - 1) if schedule == "quanta" else 0
        return _readonly(got[edge.id][:, :b])

    for t in range(1, n + 1):
        fired: dict[str, np.ndarray] = {}
        for node in net.nodes:
            outs = net.out_edges(node)
            if not outs:
                continue
            quota = {e.id: cumulative_quota(budgets[e.id], n, t) - cumulative_quota(budgets[e.id], n, t - 1)
                     for e in outs if e.is_pipe}
            code = codes.get(node)
            if code is None:
                raw = {e.id: np.zeros((T, quota[e.id]) if e.is_pipe else (T, layers), dtype=np.int64)
                       for e in outs}
            else:
                ctx = EncodeContext(
                    node=node,
                    t=t,
                    n=n,
                    layers=layers,
                    source=src[node],
                    received=MappingProxyType({e.id: visible(e, t) for e in net.in_edges(node)}),
                    quota=MappingProxyType(quota),
                    sent=MappingProxyType({k: cumulative_quota(budgets[k], n, t - 1) for k in quota}),
                    pipe_bits=budgets_view,
                )
                raw = code.encode(ctx)
                if not isinstance(raw, Mapping) or set(raw) != {e.id for e in outs}:
                    got_keys = sorted(raw) if isinstance(raw, Mapping) else type(raw).__name__
                    raise ContractViolation(
                        f"node {node} must emit exactly its out-edges {sorted(e.id for e in outs)}, got {got_keys}"
                    )
            for e in outs:
                fired[e.id] = _check_inputs(e, raw[e.id], T, layers, quota.get(e.id, 0))

        # all edges fire after every node has committed its inputs
        for e in net.edges:
            x = fired[e.id]
            if e.is_pipe:
                lo = cumulative_quota(budgets[e.id], n, t - 1)
                hi = lo + x.shape[1]
                sent[e.id][:, lo:hi] = x
                if x.shape[1]:
                    y = np.asarray(transport.deliver(e, t, x, trial_ids), dtype=np.uint8)
                    if y.shape != x.shape:
                        raise ContractViolation(f"transport changed the bit count on {e.id}")
                    got[e.id][:, lo:hi] = y
                continue
            w = noise[e.id][:, t - 1, :]
            if isinstance(e.channel, AwgnLink):
                y = x + math.sqrt(e.channel.spec.noise) * w
            else:
                y = transmit_with_uniforms(e.channel, x, w)
            xs[e.id][:, :, t - 1] = x
            ys[e.id][:, :, t - 1] = y

    final = {e.id: _readonly(ys[e.id]) for e in net.edges if not e.is_pipe}
    final.update({k: _readonly(v) for k, v in got.items()})
    recon: dict[tuple[str, str], np.ndarray] = {}
    for node in net.nodes:
        wanted = [d for d in net.demands if d.sink == node]
        if not wanted:
            continue
        code = codes.get(node)
        if code is None:
            raise ContractViolation(f"node {node} has demands but no code")
        ctx = DecodeContext(
            node=node,
            n=n,
            layers=layers,
            source=src[node],
            received=MappingProxyType({e.id: final[e.id] for e in net.in_edges(node)}),
            pipe_bits=budgets_view,
        )
        out = code.decode(ctx)
        for d in wanted:
            if d.source not in out:
                raise ContractViolation(f"node {node} did not reconstruct the source of {d.source}")
            r = np.asarray(out[d.source])
            if r.shape != (T, layers, L):
                raise ContractViolation(f"reconstruction for {d.pair} must have shape {(T, layers, L)}")
            r = r.astype(np.int64)
            if r.size and (r.min() < 0 or r.max() >= d.measure.table.shape[1]):
                raise ContractViolation(f"reconstruction for {d.pair} leaves the reproduction alphabet")
            recon[d.pair] = r

    per_layer = {d.pair: per_letter_distortion(src[d.source], recon[d.pair], d.measure) for d in net.demands}
    return RunResult(
        net=net,
        n=n,
        L=L,
        layers=layers,
        schedule=schedule,
        sources={k: np.asarray(v) for k, v in src.items()},
        reconstructions=recon,
        inputs=xs,
        outputs=ys,
        pipe_sent=sent,
        pipe_received=got,
        per_layer=per_layer,
    )


# --------------------------------------------------------------------------
# Stacking


@dataclass
class ReplicaCode:
    """Applies a single-layer code independently in every layer.

    Layers are folded into the trial axis, so the wrapped code sees
    ``T N`` single-layer realizations.  Pipe edges are not supported,
    since pooled pipe budgets do not split evenly across layers.
    """

    inner: NodeCode

    def encode(self, ctx: EncodeContext) -> dict[str, np.ndarray]:
        if ctx.quota:
            raise ContractViolation("per-layer replicas cannot drive pipe edges")
        T, N = ctx.trials, ctx.layers
        inner_ctx = EncodeContext(
            node=ctx.node,
            t=ctx.t,
            n=ctx.n,
            layers=1,
            source=ctx.source.reshape(T * N, 1, -1),
            received=MappingProxyType({k: _fold(v) for k, v in ctx.received.items()}),
            quota=ctx.quota,
            sent=ctx.sent,
            pipe_bits=ctx.pipe_bits,
        )
        out = self.inner.encode(inner_ctx)
        return {k: np.asarray(v).reshape(T, N) for k, v in out.items()}

    def decode(self, ctx: DecodeContext) -> dict[str, np.ndarray]:
        T, N = ctx.trials, ctx.layers
        inner_ctx = DecodeContext(
            node=ctx.node,
            n=ctx.n,
            layers=1,
            source=ctx.source.reshape(T * N, 1, -1),
            received=MappingProxyType({k: _fold(v) for k, v in ctx.received.items()}),
            pipe_bits=ctx.pipe_bits,
        )
        out = self.inner.decode(inner_ctx)
        return {k: np.asarray(v).reshape(T, N, -1) for k, v in out.items()}


def _fold(a: np.ndarray) -> np.ndarray:
    if a.ndim != 3:
        raise ContractViolation("per-layer replicas cannot read pipe edges")
    T, N, t = a.shape
    return a.reshape(T * N, 1, t)


@dataclass(frozen=True)
class StackedRun:
    """``layers`` independent copies of ``net`` driven by one set of codes.

    With ``shared`` set, each code is a single-layer code replicated in
    every layer; otherwise codes act across layers.
    """

    net: NetworkSpec
    layers: int
    shared: bool = False

    def run(self, codes: Mapping[str, NodeCode], **kwargs) -> RunResult:
        if self.shared:
            codes = {k: ReplicaCode(c) for k, c in codes.items()}
        return run_network(self.net, codes, layers=self.layers, **kwargs)


def stack(net: NetworkSpec, layers: int, shared: bool = False) -> StackedRun:
    if layers < 1:
        raise InvalidArgument("layers must be >= 1")
    return StackedRun(net, int(layers), bool(shared))


# --------------------------------------------------------------------------
# Unraveling


class UnraveledCode:
    """Single-layer code of blocklength ``n N`` built from an ``N``-layer code.

    Round ``r`` of the stacked code occupies times ``(r - 1) N + 1 .. r N``;
    at time ``(r - 1) N + l`` the node sends what layer ``l`` would send at
    time ``r``, computed from the outputs of rounds ``< r``.
    """

    def __init__(self, inner: NodeCode, layers: int, n: int):
        self.inner = inner
        self.layers = int(layers)
        self.n = int(n)
        self._round: dict[str, np.ndarray] = {}

    def _split_source(self, src: np.ndarray) -> np.ndarray:
        T = src.shape[0]
        return _readonly(src.reshape(T, self.layers, -1))

    def _stacked_outputs(self, a: np.ndarray, rounds: int) -> np.ndarray:
        T = a.shape[0]
        used = a[:, 0, : rounds * self.layers]
        return _readonly(used.reshape(T, rounds, self.layers).transpose(0, 2, 1))

    def encode(self, ctx: EncodeContext) -> dict[str, np.ndarray]:
        N, n = self.layers, self.n
        if ctx.layers != 1 or ctx.n != n * N:
            raise ContractViolation("unraveled code must run on one layer with blocklength n N")
        r, ell = divmod(ctx.t - 1, N)
        r += 1
        if ell == 0:
            received = {}
            for k, v in ctx.received.items():
                if v.ndim == 3:
                    received[k] = self._stacked_outputs(v, r - 1)
                else:
                    need = cumulative_quota(ctx.pipe_bits[k], n, r - 1)
                    received[k] = _readonly(v[:, : min(need, v.shape[1])])
            quota = {k: cumulative_quota(ctx.pipe_bits[k], n, r) - cumulative_quota(ctx.pipe_bits[k], n, r - 1)
                     for k in ctx.quota}
            inner_ctx = EncodeContext(
                node=ctx.node,
                t=r,
                n=n,
                layers=N,
                source=self._split_source(ctx.source),
                received=MappingProxyType(received),
                quota=MappingProxyType(quota),
                sent=MappingProxyType({k: cumulative_quota(ctx.pipe_bits[k], n, r - 1) for k in ctx.quota}),
                pipe_bits=ctx.pipe_bits,
            )
            self._round = {k: np.asarray(v) for k, v in self.inner.encode(inner_ctx).items()}
        out = {}
        for k, v in self._round.items():
            if k in ctx.quota:
                start = ctx.sent[k] - cumulative_quota(ctx.pipe_bits[k], n, r - 1)
                out[k] = v[:, start : start + ctx.quota[k]]
            else:
                out[k] = v[:, ell : ell + 1]
        return out

    def decode(self, ctx: DecodeContext) -> dict[str, np.ndarray]:
        received = {k: (self._stacked_outputs(v, self.n) if v.ndim == 3 else v) for k, v in ctx.received.items()}
        inner_ctx = DecodeContext(
            node=ctx.node,
            n=self.n,
            layers=self.layers,
            source=self._split_source(ctx.source),
            received=MappingProxyType(received),
            pipe_bits=ctx.pipe_bits,
        )
        out = self.inner.decode(inner_ctx)
        T = ctx.trials
        return {k: np.asarray(v).reshape(T, 1, -1) for k, v in out.items()}


@dataclass(frozen=True)
class UnraveledPlan:
    codes: dict[str, UnraveledCode]
    n: int
    L: int

    @property
    def kappa(self) -> float:
        return self.L / self.n


def unravel(codes: Mapping[str, NodeCode], layers: int, n: int, L: int) -> UnraveledPlan:
    """Single-layer codes with source blocklength ``N L`` and blocklength ``N n``."""
    if layers < 1 or n < 1 or L < 1:
        raise InvalidArgument("layers, n and L must be positive")
    return UnraveledPlan({k: UnraveledCode(c, layers, n) for k, c in codes.items()}, n * layers, L * layers)


def fold_unraveled(result: RunResult, layers: int) -> RunResult:
    """Re-express a single-layer run of an unraveled code in stacked coordinates."""
    if result.layers != 1 or result.n % layers or result.L % layers:
        raise InvalidArgument("result is not an unraveled run with that many layers")
    T, n, L = result.trials, result.n // layers, result.L // layers

    def sym(a):
        return a[:, 0, :].reshape(T, n, layers).transpose(0, 2, 1)

    def src(a):
        return a.reshape(T, layers, L)

    per_layer = {
        d.pair: per_letter_distortion(src(result.sources[d.source]), src(result.reconstructions[d.pair]), d.measure)
        for d in result.net.demands
    }
    return RunResult(
        net=result.net,
        n=n,
        L=L,
        layers=layers,
        schedule=result.schedule,
        sources={k: src(v) for k, v in result.sources.items()},
        reconstructions={k: src(v) for k, v in result.reconstructions.items()},
        inputs={k: sym(v) for k, v in result.inputs.items()},
        outputs={k: sym(v) for k, v in result.outputs.items()},
        pipe_sent=dict(result.pipe_sent),
        pipe_received=dict(result.pipe_received),
        per_layer=per_layer,
    )


def runs_identical(a: RunResult, b: RunResult) -> bool:
    """Bit-exact equality of transcripts, sources, reconstructions and distortions."""
    groups = ("sources", "reconstructions", "inputs", "outputs", "pipe_sent", "pipe_received")
    for g in groups:
        da, db = getattr(a, g), getattr(b, g)
        if set(da) != set(db):
            return False
        for k in da:
            if da[k].shape != db[k].shape or not np.array_equal(da[k], db[k]):
                return False
    return a.distortion_matrix().entries == b.distortion_matrix().entries
