"""Separated source-network and channel coding over a noisy network.

A code designed for the bit-pipe network runs unchanged; every batch of
pipe bits is carried over the real link by a random channel code of rate
``R_e`` and blocklength ``p M_e`` with ``M_e = ceil(N C_e / R_e)``.  Link
decoding errors corrupt the delivered bits and the run is scored as
is.  For comparison the same sources are also run over the noiseless
pipes, which gives the distortion ``D(a, b)`` in the union-bound
prediction ``D(a, b) + n |E| P_max d_max``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..channels import Dmc, discretize_awgn, transmit_with_uniforms
from ..codecs import (
    ChannelCodebook,
    bhattacharyya_max_error_bound,
    build_channel_code,
    channel_decode_batch,
    estimate_max_error,
    message_bits,
)
from ..errors import InvalidArgument
from ..netsim import (
    AwgnLink,
    BitPipe,
    Edge,
    NetworkSpec,
    NodeCode,
    RunResult,
    cumulative_quota,
    edge_capacity,
    pipe_budget,
    run_network,
)
from ..rng import RngStream, derive_seed
from .scenarios import bits_to_ints, ints_to_bits

# Bhattacharyya bound cost guard: pairs times blocklength
_BOUND_CELLS = 1 << 31


def link_dmc(edge: Edge) -> Dmc:
    """The DMC that physically carries an edge (AWGN links use their quantized version)."""
    ch = edge.channel
    if isinstance(ch, Dmc):
        return ch
    if isinstance(ch, AwgnLink):
        if ch.j is None or ch.k is None:
            raise InvalidArgument(f"AWGN edge {edge.id} needs quantizer indices j and k")
        return discretize_awgn(ch.spec, ch.j, ch.k)
    raise InvalidArgument(f"edge {edge.id} is already a bit pipe")


@dataclass(frozen=True)
class SeparationPlan:
    """Stacking parameters and per-edge channel-code rates.

    ``layers`` is ``N``, ``repeats`` is ``p``; the bit-pipe code runs over
    ``p N`` layers with ``n`` uses and ``L`` letters per layer.
    """

    layers: int
    n: int
    L: int
    rates: Mapping[str, float]
    repeats: int = 1

    @property
    def pipe_layers(self) -> int:
        return self.repeats * self.layers

    def blocklength(self, capacity: float, rate: float) -> int:
        """``M_e = ceil(N C_e / R_e)``."""
        return math.ceil(self.layers * capacity / rate - 1e-12)

    def check(self, net: NetworkSpec, capacities: Mapping[str, float]) -> dict[str, dict]:
        """Validate the plan and return per-edge bookkeeping."""
        if min(self.layers, self.n, self.L, self.repeats) < 1:
            raise InvalidArgument("layers, n, L and repeats must be positive")
        rows = {}
        for e in net.edges:
            if e.is_pipe:
                continue
            if e.id not in self.rates:
                raise InvalidArgument(f"no channel-code rate for edge {e.id}")
            c, r = capacities[e.id], float(self.rates[e.id])
            if not 0 < r < c:
                raise InvalidArgument(f"edge {e.id}: need 0 < R_e < C_e, got R_e={r}, C_e={c}")
            m = self.blocklength(c, r)
            p = self.repeats
            if p * m * r < p * self.layers * c - 1e-9:
                raise InvalidArgument(f"edge {e.id}: p M_e R_e < p N C_e")
            budget = pipe_budget(BitPipe(c), self.n, self.pipe_layers)
            quota = max(cumulative_quota(budget, self.n, t) - cumulative_quota(budget, self.n, t - 1)
                        for t in range(1, self.n + 1))
            k = message_bits(p * m, r)
            if k < quota:
                raise InvalidArgument(
                    f"edge {e.id}: channel code carries {k} bits but a round needs {quota}"
                )
            rows[e.id] = {"capacity": c, "rate": r, "M": m, "blocklength": p * m, "message_bits": k,
                          "pipe_bits": budget, "round_bits": quota}
        return rows


@dataclass
class ChannelCodedTransport:
    """Carries each round of pipe bits as one channel codeword over the real link."""

    links: Mapping[str, Dmc]
    codebooks: Mapping[str, ChannelCodebook]
    rng: RngStream
    errors: dict[str, list] = field(default_factory=dict)

    def deliver(self, edge: Edge, t: int, bits: np.ndarray, trial_ids: np.ndarray) -> np.ndarray:
        if edge.id not in self.codebooks:
            # the edge was a bit pipe in the original network
            return bits.copy()
        cb, ch = self.codebooks[edge.id], self.links[edge.id]
        q = bits.shape[1]
        msg = bits_to_ints(bits)
        x = cb.codewords[msg].astype(np.int64)
        u = np.empty(x.shape)
        for row, i in enumerate(trial_ids):
            u[row] = self.rng.child(edge.id, int(i), t).uniform(cb.blocklength)
        y = transmit_with_uniforms(ch, x, u)
        dec = channel_decode_batch(cb, y, ch, rule="ml")
        self.errors.setdefault(edge.id, []).append(dec != msg)
        # unused high codewords can still win; keep the low q bits
        return ints_to_bits(dec & ((1 << q) - 1), q)

    def error_matrix(self, edge_id: str, trials: int) -> np.ndarray:
        e = self.errors.get(edge_id, [])
        return np.stack(e, axis=1) if e else np.zeros((trials, 0), dtype=bool)


@dataclass
class SeparationReport:
    realized: RunResult
    baseline: RunResult
    plan_rows: dict[str, dict]
    link_errors: dict[str, np.ndarray]
    p_max_bound: dict[str, float | None]
    p_max_mc: dict[str, float]
    p_max: float
    prediction: dict[tuple[str, str], float]
    exceed_fraction: dict[tuple[str, str], float]

    def pairs(self) -> list[tuple[str, str]]:
        return sorted(self.prediction)

    def summary(self) -> dict:
        real = self.realized.distortion_matrix()
        base = self.baseline.distortion_matrix()
        T = self.realized.trials
        out = {
            "trials": T,
            "p_max": self.p_max,
            "p_max_bhattacharyya": {k: v for k, v in sorted(self.p_max_bound.items())},
            "p_max_monte_carlo": {k: v for k, v in sorted(self.p_max_mc.items())},
            "edges": {k: self.plan_rows[k] for k in sorted(self.plan_rows)},
            "link_error_rate": {k: float(v.any(axis=1).mean()) if v.size else 0.0
                                for k, v in sorted(self.link_errors.items())},
            "pairs": {},
        }
        for p in self.pairs():
            per = self.realized.per_trial(p)
            out["pairs"][f"{p[0]}->{p[1]}"] = {
                "distortion": real[p],
                "distortion_std_err": float(per.std(ddof=1) / math.sqrt(T)) if T > 1 else 0.0,
                "pipe_distortion": base[p],
                "union_bound": self.prediction[p],
                "exceed_fraction": self.exceed_fraction[p],
                "block_error_rate": float(self.realized.block_errors(p).mean()),
            }
        return out


def run_separated(
    net: NetworkSpec,
    codes: Mapping[str, NodeCode],
    plan: SeparationPlan,
    trials: int,
    rng: RngStream,
    mc_trials: int = 2000,
    schedule: str = "quanta",
) -> SeparationReport:
    """Run a bit-pipe code over the noisy network ``net`` through channel codes.

    ``codes`` is a code for ``bit_pipe_equivalent(net)`` with ``p N``
    layers.  The maximal link error probability used in the prediction is
    the union-Bhattacharyya bound when it is affordable, else the Monte
    Carlo estimate; both are reported.
    """
    capacities = {e.id: edge_capacity(e.channel) if e.is_pipe else edge_capacity(link_dmc(e)) for e in net.edges}
    rows = plan.check(net, capacities)
    net_b = net.with_channels({e.id: BitPipe(capacities[e.id]) for e in net.edges})
    links = {e.id: link_dmc(e) for e in net.edges if not e.is_pipe}
    books = {}
    for eid, row in rows.items():
        seed = derive_seed(rng.master_seed, *rng.path, "channel_code", eid)
        books[eid] = build_channel_code(links[eid], row["rate"], row["blocklength"], seed)

    transport = ChannelCodedTransport(links, books, rng.child("links"))
    kwargs = dict(n=plan.n, L=plan.L, layers=plan.pipe_layers, schedule=schedule)
    realized = run_network(net_b, codes, rng=rng.child("network"), trials=trials, transport=transport, **kwargs)
    baseline = run_network(net_b, codes, rng=rng.child("network"), sources=realized.sources, **kwargs)

    bound: dict[str, float | None] = {}
    mc: dict[str, float] = {}
    for eid, cb in books.items():
        cells = cb.size * cb.size * cb.blocklength
        bound[eid] = bhattacharyya_max_error_bound(cb, links[eid]) if cells <= _BOUND_CELLS else None
        mc[eid] = estimate_max_error(cb, links[eid], mc_trials, rng.child("p_max", eid)).max_error
    if books:
        p_max = max(min(1.0, bound[e]) if bound[e] is not None else mc[e] for e in books)
    else:
        p_max = 0.0

    noisy_edges = len(books)
    prediction, exceed = {}, {}
    for d in net.demands:
        slack = plan.n * noisy_edges * p_max * d.measure.d_max
        prediction[d.pair] = baseline.distortion_matrix()[d.pair] + slack
        over = realized.per_trial(d.pair) > baseline.per_trial(d.pair) + slack + 1e-12
        exceed[d.pair] = float(over.mean())
    return SeparationReport(
        realized=realized,
        baseline=baseline,
        plan_rows=rows,
        link_errors={e: transport.error_matrix(e, realized.trials) for e in books},
        p_max_bound=bound,
        p_max_mc=mc,
        p_max=p_max,
        prediction=prediction,
        exceed_fraction=exceed,
    )
