"""Turning a small-distortion code into a lossless one.

The base code is run for ``N`` sessions.  The sink then knows ``U^L(l)``
up to a few letter errors, so a Slepian-Wolf bin of ``U^{L N}`` with
``k`` bits suffices to fix them.  Those ``k`` bits are sent over ``N'``
extra sessions of the same base code, used as a super-channel
``p(u_hat^L | u^L)``: node ``a`` feeds inner channel-code symbols (whole
``L``-blocks) in place of its source, every other node feeds a fixed
typical dummy block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from ..channels import Dmc
from ..codecs import (
    MAX_MESSAGE_BITS,
    build_binning_code,
    build_channel_code,
    channel_decode_batch,
    sw_bins,
    sw_decode,
)
from ..coding_theorems import ba_capacity, f_epsilon
from ..errors import InvalidArgument, PlanInfeasible, ResourceLimit
from ..info_core import conditional_entropy, is_typical
from ..netsim import NetworkSpec, NodeCode, RunResult, stack
from ..rng import RngStream, derive_seed

MAX_BLOCK_ALPHABET = 4096


def block_index(blocks: np.ndarray, k: int) -> np.ndarray:
    """Base-``k`` value of each length-``L`` block (first letter most significant)."""
    b = np.asarray(blocks, dtype=np.int64)
    L = b.shape[-1]
    weights = k ** np.arange(L - 1, -1, -1, dtype=np.int64)
    return (b * weights).sum(axis=-1)


def block_letters(index: np.ndarray, k: int, L: int) -> np.ndarray:
    idx = np.asarray(index, dtype=np.int64)
    weights = k ** np.arange(L - 1, -1, -1, dtype=np.int64)
    return (idx[..., None] // weights) % k


@dataclass(frozen=True, eq=False)
class LosslessPatchPlan:
    """Session counts and rates of the patch for demand ``pair``.

    ``r0`` is the binning rate in bits per base session (``k / N``) and
    ``r0_estimate`` the plug-in estimate of ``H(U^L | U_hat^L)`` it was
    derived from.  ``c0`` is the conservative super-channel capacity
    estimate, ``min(c0_lower, c0_ba)``, in bits per session.
    """

    pair: tuple[str, str]
    L: int
    n: int
    sessions: int
    extra_sessions: int
    bin_bits: int
    r0_estimate: float
    r0_bound: float
    epsilon: float
    delta: float
    c0: float
    c0_lower: float
    c0_ba: float
    super_channel: Dmc
    letter_joint: np.ndarray
    dummy: Mapping[str, np.ndarray]
    margin_bits: int

    @property
    def r0(self) -> float:
        return self.bin_bits / self.sessions

    @property
    def kappa(self) -> Fraction:
        return Fraction(self.L, self.n)

    @property
    def kappa_prime(self) -> Fraction:
        return Fraction(self.sessions * self.L, (self.sessions + self.extra_sessions) * self.n)

    @property
    def c0_operational(self) -> Fraction:
        """Bits actually carried per extra session, ``k / N'`` (zero when nothing is sent)."""
        return Fraction(self.bin_bits, self.extra_sessions) if self.extra_sessions else Fraction(0)

    def sandwich(self) -> tuple[Fraction, Fraction, Fraction]:
        """``(kappa / (1 + R0 / C0), kappa', kappa)`` with the operational ``C0``."""
        if self.bin_bits == 0:
            low = self.kappa
        else:
            low = self.kappa / (1 + Fraction(self.bin_bits, self.sessions) / self.c0_operational)
        return low, self.kappa_prime, self.kappa

    def summary(self) -> dict:
        low, kp, k = self.sandwich()
        return {
            "pair": f"{self.pair[0]}->{self.pair[1]}",
            "L": self.L,
            "n": self.n,
            "sessions": self.sessions,
            "extra_sessions": self.extra_sessions,
            "bin_bits": self.bin_bits,
            "margin_bits": self.margin_bits,
            "r0_per_session": self.r0,
            "r0_estimate": self.r0_estimate,
            "r0_bound_L_f_eps": self.r0_bound,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "c0": self.c0,
            "c0_lower": self.c0_lower,
            "c0_ba": self.c0_ba,
            "kappa": str(k),
            "kappa_prime": str(kp),
            "kappa_lower": str(low),
            "overhead": self.extra_sessions / self.sessions,
            "r0_over_c0": self.r0 / self.c0 if self.c0 > 0 else math.inf,
            "dummy": {k: v.tolist() for k, v in sorted(self.dummy.items())},
        }


def _other_law(net: NetworkSpec, a: str) -> tuple[tuple[str, ...], np.ndarray]:
    law = net.source
    others = tuple(x for x in law.nodes if x != a)
    if a not in law.nodes:
        raise InvalidArgument(f"node {a} has no source")
    axis = law.nodes.index(a)
    return others, law.probs.sum(axis=axis).ravel() if others else np.ones(1)


def _conditional_entropy_given_others(net: NetworkSpec, a: str) -> float:
    law = net.source
    axis = law.nodes.index(a)
    p = np.moveaxis(law.probs, axis, 0).reshape(law.probs.shape[axis], -1)
    return conditional_entropy(p)


def _source_block(net, a, others, dummy_idx, shape_others, ua):
    """Source override: node ``a`` gets ``ua``; other source nodes get the dummy."""
    T, N, L = ua.shape
    out = {a: ua}
    if others:
        per = np.stack(np.unravel_index(dummy_idx, shape_others), axis=0)  # (#others, L)
        for i, node in enumerate(others):
            out[node] = np.broadcast_to(per[i], (T, N, L)).copy()
    return out


def plan_lossless_patch(
    net: NetworkSpec,
    base: Mapping[str, NodeCode],
    pair: tuple[str, str],
    L: int,
    n: int,
    sessions: int,
    rng: RngStream,
    calibration_trials: int = 4000,
    delta: float = 0.05,
    margin_bits: int = 8,
    candidates: int = 64,
    candidate_trials: int = 200,
    extra_sessions: int | None = None,
    smoothing: float = 0.5,
) -> LosslessPatchPlan:
    """Measure the base code and size the patch.

    Raises ``InvalidArgument`` when the measured distortion is not below
    ``d_min / 2`` and ``PlanInfeasible`` when the capacity estimate cannot
    carry the bin index in the requested number of extra sessions.
    """
    a, b = pair
    demand = next((d for d in net.demands if d.pair == pair), None)
    if demand is None:
        raise InvalidArgument(f"no demand {pair}")
    if not demand.measure.faithful:
        raise InvalidArgument("the patch needs a faithful distortion measure")
    if sessions < 1 or not 0 < delta < 1:
        raise InvalidArgument("need sessions >= 1 and 0 < delta < 1")
    K = net.source.alphabet_size(a)
    if K**L > MAX_BLOCK_ALPHABET:
        raise ResourceLimit(f"super-channel alphabet {K}^{L} exceeds {MAX_BLOCK_ALPHABET}")
    d_min = demand.measure.d_min
    law = net.source
    others, p_others = _other_law(net, a)
    shape_others = tuple(law.probs.shape[law.nodes.index(x)] for x in others)

    # base behaviour on genuine sources
    calib = stack(net, 1, shared=True).run(base, n=n, L=L, rng=rng.child("calibrate"), trials=calibration_trials)
    u = calib.sources[a][:, 0, :]
    uh = calib.reconstructions[pair][:, 0, :]
    eps = float(calib.distortion_matrix()[pair])
    if eps >= d_min / 2:
        raise InvalidArgument(f"base distortion {eps:.4g} is not below d_min / 2 = {d_min / 2:.4g}")
    kb = K**L
    joint_blocks = np.zeros((kb, kb))
    np.add.at(joint_blocks, (block_index(u, K), block_index(uh, K)), 1.0)
    r0_est = conditional_entropy(joint_blocks / joint_blocks.sum())
    r0_bound = L * f_epsilon(eps, d_min, K)
    letter_joint = np.zeros((K, K))
    np.add.at(letter_joint, (u.ravel(), uh.ravel()), 1.0)
    letter_joint = (letter_joint + smoothing) / (letter_joint + smoothing).sum()

    # dummy block for the other nodes: typical, smallest measured distortion
    gen = rng.child("dummy").generator()
    cum = np.cumsum(p_others)
    cum[-1] = 1.0
    pool = []
    for _ in range(candidates * 64):
        seq = np.minimum(np.searchsorted(cum, gen.random(L), side="right"), cum.size - 1)
        if not others or is_typical(seq, p_others, delta):
            pool.append(seq)
        if len(pool) == candidates:
            break
    if not pool:
        raise PlanInfeasible("no delta-typical dummy block found")
    pool = np.array(pool, dtype=np.int64)
    cond = _conditional_rows(net, a)
    scores = []
    for i, dummy in enumerate(pool):
        ua = _draw_conditional(cond, dummy, candidate_trials, L, rng.child("candidate", i))
        srcs = _source_block(net, a, others, dummy, shape_others, ua)
        run = stack(net, 1, shared=True).run(base, n=n, L=L, rng=rng.child("candidate_run", i), sources=srcs)
        scores.append(run.distortion_matrix()[pair])
    best = int(np.argmin(scores))
    dummy = pool[best]
    dummy_nodes = {}
    if others:
        per = np.unravel_index(dummy, shape_others)
        dummy_nodes = {node: np.asarray(per[i], dtype=np.int64) for i, node in enumerate(others)}

    # super-channel p(u_hat^L | u^L) with the dummy in place, inputs uniform over blocks
    per_row = max(1, calibration_trials // kb)
    inputs = np.repeat(np.arange(kb), per_row)
    ua = block_letters(inputs, K, L)[:, None, :]
    srcs = _source_block(net, a, others, dummy, shape_others, ua)
    sc_run = stack(net, 1, shared=True).run(base, n=n, L=L, rng=rng.child("super_channel"), sources=srcs)
    out_idx = block_index(sc_run.reconstructions[pair][:, 0, :], K)
    counts = np.zeros((kb, kb))
    np.add.at(counts, (inputs, out_idx), 1.0)
    w = (counts + smoothing) / (counts + smoothing).sum(axis=1, keepdims=True)
    super_channel = Dmc(w)
    c0_ba = ba_capacity(super_channel).capacity
    h_cond = _conditional_entropy_given_others(net, a)
    ratio = eps / (1 - delta)
    c0_lower = (1 - delta) ** 2 * L * h_cond - (L * f_epsilon(ratio, d_min, K) if ratio < d_min / 2 else math.inf)
    c0 = min(c0_lower, c0_ba)
    if c0 <= 0:
        raise PlanInfeasible(f"super-channel capacity estimate {c0:.4g} is not positive")

    k = math.ceil(sessions * r0_est - 1e-12) + margin_bits if r0_est > 0 else 0
    if k > MAX_MESSAGE_BITS:
        raise ResourceLimit(f"{k} bin bits exceed the inner-code cap of {MAX_MESSAGE_BITS}")
    if extra_sessions is None:
        # with nothing to bin there is nothing to send
        extra = math.floor(k / c0) + 1 if k > 0 else 0
    else:
        extra = int(extra_sessions)
        if extra < 1 or (k > 0 and extra * c0 <= k):
            raise PlanInfeasible(f"C0 estimate {c0:.4g} <= R0 N / N' = {k / max(extra, 1):.4g}")
    return LosslessPatchPlan(
        pair=pair,
        L=L,
        n=n,
        sessions=sessions,
        extra_sessions=extra,
        bin_bits=k,
        r0_estimate=r0_est,
        r0_bound=r0_bound,
        epsilon=eps,
        delta=delta,
        c0=c0,
        c0_lower=c0_lower,
        c0_ba=c0_ba,
        super_channel=super_channel,
        letter_joint=letter_joint,
        dummy=dummy_nodes,
        margin_bits=margin_bits,
    )


def _conditional_rows(net: NetworkSpec, a: str) -> np.ndarray:
    """``p(u_a | u_others)`` with the others flattened: shape ``(|others|, K)``."""
    law = net.source
    axis = law.nodes.index(a)
    p = np.moveaxis(law.probs, axis, -1).reshape(-1, law.probs.shape[axis])
    tot = p.sum(axis=1, keepdims=True)
    return np.divide(p, tot, out=np.full_like(p, 1.0 / p.shape[1]), where=tot > 0)


def _draw_conditional(cond: np.ndarray, dummy: np.ndarray, T: int, L: int, stream: RngStream) -> np.ndarray:
    cum = np.cumsum(cond[dummy], axis=1)
    cum[:, -1] = 1.0
    u = stream.uniform((T, L))
    out = (u[..., None] >= cum[None, :, :]).sum(axis=-1)
    return out[:, None, :].astype(np.int64)


@dataclass
class PatchReport:
    plan: LosslessPatchPlan
    block_errors: np.ndarray
    base_block_errors: np.ndarray
    inner_errors: np.ndarray
    sw_failures: np.ndarray
    base: RunResult = field(repr=False)

    @property
    def block_error_rate(self) -> float:
        return float(self.block_errors.mean())

    def summary(self) -> dict:
        low, kp, k = self.plan.sandwich()
        out = self.plan.summary()
        out.update(
            {
                "trials": int(self.block_errors.size),
                "block_error_rate": self.block_error_rate,
                "base_block_error_rate": float(self.base_block_errors.mean()),
                "inner_code_error_rate": float(self.inner_errors.mean()),
                "sw_failure_rate": float(self.sw_failures.mean()),
                "sandwich_holds": bool(low <= kp <= k),
            }
        )
        return out


def run_lossless_patch(
    net: NetworkSpec,
    base: Mapping[str, NodeCode],
    plan: LosslessPatchPlan,
    trials: int,
    rng: RngStream,
) -> PatchReport:
    """Run base sessions, bin, send the bin over extra sessions, and decode exactly or flag an error."""
    a, _ = plan.pair
    K = net.source.alphabet_size(a)
    L, N, Np = plan.L, plan.sessions, plan.extra_sessions
    law = net.source
    others = tuple(x for x in law.nodes if x != a)

    base_run = stack(net, N, shared=True).run(base, n=plan.n, L=L, rng=rng.child("base"), trials=trials)
    u = base_run.sources[a].reshape(trials, N * L)
    uh = base_run.reconstructions[plan.pair].reshape(trials, N * L)

    k = plan.bin_bits
    seed = derive_seed(rng.master_seed, *rng.path, "patch_codes")
    bc = build_binning_code(k / (N * L), N * L, K, seed, epsilon=plan.delta)
    if k > 0:
        cb = build_channel_code(plan.super_channel, k / Np, Np, seed)
        bins = sw_bins(bc, u)
        words = cb.codewords[bins].astype(np.int64)  # (T, N') block symbols
        ua = block_letters(words, K, L)  # (T, N', L)
        srcs = {a: ua}
        for node in others:
            srcs[node] = np.broadcast_to(plan.dummy[node], (trials, Np, L)).copy()
        extra = stack(net, Np, shared=True).run(base, n=plan.n, L=L, rng=rng.child("extra"), sources=srcs)
        y = block_index(extra.reconstructions[plan.pair], K)
        got = channel_decode_batch(cb, y, plan.super_channel)
        inner_err = got != bins
    else:
        got = np.zeros(trials, dtype=np.int64)
        inner_err = np.zeros(trials, dtype=bool)

    est = np.empty_like(u)
    fail = np.zeros(trials, dtype=bool)
    for i in range(trials):
        res = sw_decode(bc, int(got[i]), uh[i], plan.letter_joint, method="ml")
        if res.ok:
            est[i] = res.sequence
        else:
            fail[i] = True
            est[i] = uh[i]
    errors = np.any(est != u, axis=1)
    return PatchReport(
        plan=plan,
        block_errors=errors,
        base_block_errors=np.any(uh != u, axis=1),
        inner_errors=inner_err,
        sw_failures=fail,
        base=base_run,
    )
