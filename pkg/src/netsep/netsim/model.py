"""Network data model: nodes, edges with channel records, sources, demands."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from ..channels import AwgnSpec, Dmc, awgn_capacity
from ..coding_theorems import DistortionMeasure, ba_capacity
from ..errors import InvalidArgument
from ..info_core import NORMALIZATION_TOL

# absolute slack in floor(n C) so a capacity like 0.5 - 1e-12 still yields n/2 bits
PIPE_SLACK = 1e-9


@dataclass(frozen=True)
class BitPipe:
    """Error-free link delivering ``floor(n C)`` bits over ``n`` uses."""

    capacity: float

    def __post_init__(self) -> None:
        if not (self.capacity >= 0 and math.isfinite(self.capacity)):
            raise InvalidArgument("pipe capacity must be finite and non-negative")

    def bits(self, uses: int) -> int:
        return int(math.floor(uses * self.capacity + PIPE_SLACK))


@dataclass(frozen=True)
class AwgnLink:
    """AWGN edge; ``j`` and ``k`` are the quantizer indices used for discretization."""

    spec: AwgnSpec
    j: int | None = None
    k: int | None = None


ChannelModel = Union[Dmc, AwgnLink, BitPipe]


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    channel: ChannelModel

    @property
    def is_pipe(self) -> bool:
        return isinstance(self.channel, BitPipe)


@dataclass(frozen=True, eq=False)
class SourceLaw:
    """Joint pmf of the node sources; axis ``i`` belongs to ``nodes[i]``.

    Nodes not listed observe the constant source 0.
    """

    nodes: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.array(self.probs, dtype=float)
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if p.ndim != len(self.nodes):
            raise InvalidArgument("source pmf needs one axis per source node")
        if np.any(p < 0) or abs(p.sum() - 1.0) > NORMALIZATION_TOL:
            raise InvalidArgument("source pmf must be non-negative and sum to 1")
        if len(set(self.nodes)) != len(self.nodes):
            raise InvalidArgument("duplicate source node")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def alphabet_size(self, node: str) -> int:
        if node not in self.nodes:
            return 1
        return int(self.probs.shape[self.nodes.index(node)])

    def marginal(self, node: str) -> np.ndarray:
        if node not in self.nodes:
            return np.ones(1)
        i = self.nodes.index(node)
        axes = tuple(a for a in range(self.probs.ndim) if a != i)
        return self.probs.sum(axis=axes)

    def pair(self, a: str, b: str) -> np.ndarray:
        """Joint pmf of the sources at ``a`` and ``b`` as a matrix."""
        if a == b:
            return np.diag(self.marginal(a))
        ia = self.nodes.index(a) if a in self.nodes else None
        ib = self.nodes.index(b) if b in self.nodes else None
        if ia is None or ib is None:
            return np.outer(self.marginal(a), self.marginal(b))
        axes = tuple(x for x in range(self.probs.ndim) if x not in (ia, ib))
        m = self.probs.sum(axis=axes)
        return m if ia < ib else m.T


@dataclass(frozen=True)
class Demand:
    """Node ``sink`` wants the source of node ``source`` under ``measure``.

    ``target`` is the distortion target; ``lossless`` asks for exact
    block recovery instead.
    """

    source: str
    sink: str
    measure: DistortionMeasure
    target: float | None = None
    lossless: bool = False

    @property
    def pair(self) -> tuple[str, str]:
        return (self.source, self.sink)


@dataclass(frozen=True)
class NetworkSpec:
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    source: SourceLaw
    demands: tuple[Demand, ...] = ()
    name: str = "network"

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda e: e.id)))
        object.__setattr__(self, "demands", tuple(self.demands))
        if len(set(self.nodes)) != len(self.nodes):
            raise InvalidArgument("duplicate node id")
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise InvalidArgument("duplicate edge id")
        known = set(self.nodes)
        for e in self.edges:
            if e.tail not in known or e.head not in known:
                raise InvalidArgument(f"edge {e.id} has an unknown endpoint")
        for s in self.source.nodes:
            if s not in known:
                raise InvalidArgument(f"source node {s} is not in the graph")
        seen = set()
        for d in self.demands:
            if d.source not in known or d.sink not in known:
                raise InvalidArgument(f"demand {d.pair} names an unknown node")
            if d.pair in seen:
                raise InvalidArgument(f"duplicate demand {d.pair}")
            seen.add(d.pair)
            ku = self.source.alphabet_size(d.source)
            if d.measure.table.shape[0] != ku:
                raise InvalidArgument(f"distortion table rows for {d.pair} do not match |U|")

    def edge(self, edge_id: str) -> Edge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise KeyError(edge_id)

    def in_edges(self, node: str) -> tuple[Edge, ...]:
        """Incoming edges in wire order (sorted by id)."""
        return tuple(e for e in self.edges if e.head == node)

    def out_edges(self, node: str) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.tail == node)

    def with_channels(self, channels: dict[str, ChannelModel]) -> "NetworkSpec":
        edges = tuple(replace(e, channel=channels.get(e.id, e.channel)) for e in self.edges)
        return replace(self, edges=edges)


def edge_capacity(channel: ChannelModel, tol: float = 1e-9) -> float:
    """Capacity of one edge model in bits per use."""
    if isinstance(channel, BitPipe):
        return channel.capacity
    if isinstance(channel, AwgnLink):
        return awgn_capacity(channel.spec)
    return ba_capacity(channel, tol=tol).capacity


def bit_pipe_equivalent(net: NetworkSpec, tol: float = 1e-9) -> NetworkSpec:
    """The network with every noisy edge replaced by a pipe of its capacity."""
    pipes = {e.id: BitPipe(edge_capacity(e.channel, tol)) for e in net.edges if not e.is_pipe}
    return replace(net.with_channels(pipes), name=f"{net.name}_b")


@dataclass(frozen=True)
class DistortionMatrix:
    """Expected per-letter distortions ``D(a, b)`` for each demanded pair."""

    entries: dict[tuple[str, str], float] = field(default_factory=dict)

    def __getitem__(self, pair: tuple[str, str]) -> float:
        return self.entries[pair]

    def pairs(self) -> list[tuple[str, str]]:
        return sorted(self.entries)

    def as_rows(self) -> list[dict]:
        return [{"source": a, "sink": b, "distortion": self.entries[(a, b)]} for a, b in self.pairs()]
