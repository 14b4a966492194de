"""Channel emulation (soft covering) codes.

An emulation code of rate ``R`` holds ``2^floor(N R)`` codewords drawn
i.i.d. from the output marginal ``p(y)``.  The encoder sends the index of
the first codeword jointly typical with the input block (index 0 when
none is), and the decoder replays that codeword, so the pair
``(X^N, Y^N)`` looks as if ``X^N`` had gone through the channel.

Two evaluation modes are provided.  ``explicit`` materializes the
codebook (at most 2^20 words).  ``ensemble`` simulates a fresh random
codebook per trial without materializing it: the index of the first
typical codeword is geometric, so the encoder output is distributed as a
single ``p(y)`` draw conditioned on joint typicality, and the fallback
event has probability ``(1 - q)^(2^K)`` where ``q`` is the exact
probability that one codeword is typical.  This is what makes
blocklengths like ``N = 4096`` with ``floor(N R)`` in the thousands
reachable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

from ..channels import Dmc
from ..errors import InvalidArgument, ResourceLimit
from ..info_core import (
    JointPmf,
    Pmf,
    as_pmf,
    as_sequence,
    joint_counts,
    mutual_information,
    total_variation,
    typical_count_bounds,
)
from ..rng import RngStream, derive_seed
from .channel_code import MAX_MESSAGE_BITS, compact_dtype, message_bits, sample_iid

DEFAULT_EPSILON = 0.1
# codeword cells held in memory by an explicit codebook
MAX_CODEBOOK_CELLS = 1 << 27
_SCAN_CHUNK = 4096


@dataclass(frozen=True, eq=False)
class EmulationCodebook:
    rate: float
    blocklength: int
    epsilon: float
    seed: int
    time_index: int
    joint: JointPmf
    codewords: np.ndarray

    @property
    def output_law(self) -> Pmf:
        return self.joint.marginal_y()

    @property
    def size(self) -> int:
        return int(self.codewords.shape[0])

    def descriptor(self) -> dict:
        return {
            "type": "emulation",
            "rate": self.rate,
            "blocklength": self.blocklength,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "time_index": self.time_index,
        }


def emulation_joint(ch: Dmc, p_x: Pmf | np.ndarray) -> JointPmf:
    return JointPmf.from_channel(as_pmf(p_x), ch.transitions)


def build_emulation_code(
    ch: Dmc,
    p_x: Pmf | np.ndarray,
    rate: float,
    blocklength: int,
    epsilon: float = DEFAULT_EPSILON,
    seed: int = 0,
    time_index: int = 1,
) -> EmulationCodebook:
    """Codebook of ``2^floor(N R)`` words i.i.d. from ``p(y)``.

    ``time_index`` selects an independent codebook for each channel use
    ``t`` of a network code; ``R <= I(X;Y)`` is accepted so that negative
    controls can be run.
    """
    if rate <= 0:
        raise InvalidArgument("rate must be positive")
    if blocklength < 1:
        raise InvalidArgument("blocklength must be >= 1")
    if epsilon <= 0:
        raise InvalidArgument("epsilon must be positive")
    joint = emulation_joint(ch, p_x)
    k = message_bits(blocklength, rate)
    if k > MAX_MESSAGE_BITS or (blocklength << k) > MAX_CODEBOOK_CELLS:
        raise ResourceLimit(
            f"explicit emulation codebook of 2^{k} x {blocklength} exceeds the desk-scale cap"
        )
    stream = RngStream(seed, ("emulation_code", int(time_index)))
    words = sample_iid(joint.marginal_y(), (1 << k, blocklength), stream)
    words = words.astype(compact_dtype(ch.output_size))
    words.setflags(write=False)
    return EmulationCodebook(
        rate=float(rate),
        blocklength=int(blocklength),
        epsilon=float(epsilon),
        seed=int(seed),
        time_index=int(time_index),
        joint=joint,
        codewords=words,
    )


def _typical_rows(words: np.ndarray, x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    ok = np.ones(words.shape[0], dtype=bool)
    for a in range(lo.shape[0]):
        cols = words[:, x == a]
        for b in range(lo.shape[1]):
            c = (cols == b).sum(axis=1)
            ok &= (c >= lo[a, b]) & (c <= hi[a, b])
    return ok


def emulate_encode(cb: EmulationCodebook, xn, joint: JointPmf | None = None) -> int:
    """Smallest index whose codeword is jointly typical with ``x^N``; 0 if none."""
    jt = cb.joint if joint is None else joint
    x = as_sequence(xn)
    if x.size != cb.blocklength:
        raise InvalidArgument(f"input length {x.size} != blocklength {cb.blocklength}")
    if x.max(initial=0) >= jt.shape[0]:
        return 0
    lo, hi = typical_count_bounds(jt.probs, cb.blocklength, cb.epsilon)
    for start in range(0, cb.size, _SCAN_CHUNK):
        ok = _typical_rows(cb.codewords[start : start + _SCAN_CHUNK], x, lo, hi)
        hits = np.flatnonzero(ok)
        if hits.size:
            return int(start + hits[0])
    return 0


def emulate_encode_status(cb: EmulationCodebook, xn) -> tuple[int, bool]:
    """``(index, fell_back)``; ``fell_back`` is true when no codeword was typical."""
    m = emulate_encode(cb, xn)
    if m != 0:
        return m, False
    x = as_sequence(xn)
    lo, hi = typical_count_bounds(cb.joint.probs, cb.blocklength, cb.epsilon)
    ok = bool(_typical_rows(cb.codewords[:1], x, lo, hi)[0]) if x.max(initial=0) < lo.shape[0] else False
    return 0, not ok


def emulate_decode(cb: EmulationCodebook, message: int) -> np.ndarray:
    if not 0 <= int(message) < cb.size:
        raise InvalidArgument(f"message {message} out of range [0, {cb.size})")
    return cb.codewords[int(message)].astype(np.int64)


# --------------------------------------------------------------------------
# Random-codebook ensemble


class _Box:
    """Multinomial ``(n, q)`` restricted to per-category count ranges.

    ``log_mass`` is the log probability of the box; ``sample`` draws a
    count vector from the multinomial conditioned on the box.
    """

    def __init__(self, n: int, q: np.ndarray, lo: np.ndarray, hi: np.ndarray):
        self.n = n
        self.q = q
        self.lo = lo
        self.hi = np.minimum(hi, n)
        k = q.shape[0]
        tails = np.concatenate([np.cumsum(q[::-1])[::-1], [0.0]])
        self.cond = np.where(tails[:-1] > 0, q / np.where(tails[:-1] > 0, tails[:-1], 1.0), 0.0)
        self.cond[-1] = 1.0 if tails[-2] > 0 else 0.0
        s = np.arange(n + 1)
        beta = np.full((k + 1, n + 1), -np.inf)
        beta[k, 0] = 0.0
        for j in range(k - 1, -1, -1):
            lo_j, hi_j = int(self.lo[j]), int(self.hi[j])
            if lo_j > hi_j:
                break
            c = np.arange(lo_j, hi_j + 1)
            rem = s[:, None] - c[None, :]
            valid = rem >= 0
            with np.errstate(divide="ignore", invalid="ignore"):
                lp = binom.logpmf(c[None, :], s[:, None], self.cond[j])
            terms = np.where(valid, lp + beta[j + 1][np.clip(rem, 0, n)], -np.inf)
            beta[j] = logsumexp(terms, axis=1)
        self.beta = beta

    @property
    def log_mass(self) -> float:
        return float(self.beta[0, self.n])

    def sample(self, gen: np.random.Generator) -> np.ndarray:
        counts = np.zeros(self.q.shape[0], dtype=np.int64)
        s = self.n
        for j in range(self.q.shape[0]):
            lo_j, hi_j = int(self.lo[j]), min(int(self.hi[j]), s)
            c = np.arange(lo_j, hi_j + 1)
            with np.errstate(divide="ignore", invalid="ignore"):
                lw = binom.logpmf(c, s, self.cond[j]) + self.beta[j + 1][s - c]
            w = np.exp(lw - logsumexp(lw))
            pick = int(gen.choice(c, p=w / w.sum()))
            counts[j] = pick
            s -= pick
        return counts


def _log_fail_probability(log_q: float, k: int) -> float:
    """``log (1 - q)^(2^k)`` without overflow."""
    if log_q == -np.inf:
        return 0.0
    if log_q >= 0.0:
        return -np.inf
    q = math.exp(log_q)
    if q > 1e-8:
        return math.ldexp(math.log1p(-q), k) if k < 1000 else -np.inf
    # log1p(-q) ~ -q for tiny q; 2^k q = exp(k ln 2 + log q)
    e = k * math.log(2.0) + log_q
    return -math.exp(e) if e < 700 else -np.inf


def ensemble_emulate(
    joint: JointPmf,
    xn: np.ndarray,
    rate: float,
    epsilon: float,
    stream: RngStream,
) -> tuple[np.ndarray, bool]:
    """One emulation trial over a fresh random codebook.

    Returns ``(y^N, fell_back)`` where ``y^N`` is distributed exactly as
    the decoder output of a freshly drawn ``2^floor(N R)``-word codebook.
    """
    x = as_sequence(xn)
    n = x.size
    k = message_bits(n, rate)
    q = joint.marginal_y().probs
    lo, hi = typical_count_bounds(joint.probs, n, epsilon)
    nx = np.bincount(x, minlength=joint.shape[0])
    if nx.shape[0] > joint.shape[0]:
        boxes = None
    else:
        boxes = [_Box(int(nx[a]), q, lo[a], hi[a]) for a in range(joint.shape[0])]
    log_q = -np.inf if boxes is None else sum(b.log_mass for b in boxes)
    gen = stream.generator()
    log_fail = _log_fail_probability(log_q, k)
    fell_back = bool(math.log(gen.random() + 2.0**-54) < log_fail) if log_fail > -np.inf else False
    y = np.empty(n, dtype=np.int64)
    if not fell_back:
        for a, box in enumerate(boxes):
            pos = np.flatnonzero(x == a)
            counts = box.sample(gen)
            vals = np.repeat(np.arange(q.shape[0]), counts)
            y[pos] = gen.permutation(vals)
        return y, False
    # codeword 0 conditioned on not being typical
    for attempt in range(100000):
        cand = sample_iid(Pmf(q), n, stream.child("fallback", attempt))
        counts = joint_counts(x, cand, joint.shape) if boxes is not None else None
        if counts is None or not np.all((counts >= lo) & (counts <= hi)):
            return cand, True
    raise RuntimeError("fallback rejection sampling did not terminate")


# --------------------------------------------------------------------------
# Fidelity measurement


@dataclass(frozen=True)
class FidelityStats:
    rate: float
    blocklength: int
    margin: float
    mean_tv: float
    median_tv: float
    fallback_rate: float
    mode: str
    tvs: np.ndarray
    median_channel_tv: float
    channel_tvs: np.ndarray

    def row(self) -> dict:
        return {
            "rate": self.rate,
            "margin": self.margin,
            "N": self.blocklength,
            "mean_tv": self.mean_tv,
            "median_tv": self.median_tv,
            "median_channel_tv": self.median_channel_tv,
            "mean_channel_tv": float(self.channel_tvs.mean()),
            "fallback_rate": self.fallback_rate,
            "mode": self.mode,
        }


def _explicit_feasible(rate: float, n: int) -> bool:
    k = message_bits(n, rate)
    return k <= MAX_MESSAGE_BITS and (n << k) <= MAX_CODEBOOK_CELLS


def emulation_fidelity(
    ch: Dmc,
    p_x: Pmf | np.ndarray,
    rate: float,
    blocklength: int,
    epsilon: float,
    trials: int,
    rng: RngStream,
    mode: str = "auto",
) -> FidelityStats:
    """TV between the joint type of ``(X^N, Y^N)`` and ``p(x) p(y|x)`` over emulation trials.

    The channel part, the TV to ``pi(x) p(y|x)`` with ``pi(x)`` the type of
    the source block, is reported alongside; it ignores how typical the
    source happened to be, so a channel with one output scores exactly 0.

    ``mode`` is ``explicit`` (one materialized codebook shared by all
    trials), ``ensemble`` (fresh lazily sampled codebook per trial), or
    ``auto`` (explicit when the codebook fits the desk-scale cap).
    """
    if trials < 1:
        raise InvalidArgument("trials must be >= 1")
    joint = emulation_joint(ch, p_x)
    px = joint.marginal_x()
    w = ch.transitions
    if mode == "auto":
        mode = "explicit" if _explicit_feasible(rate, blocklength) else "ensemble"
    if mode not in ("explicit", "ensemble"):
        raise InvalidArgument(f"unknown emulation mode {mode!r}")
    tvs = np.empty(trials)
    channel_tvs = np.empty(trials)
    fallbacks = 0
    if mode == "explicit":
        cb = build_emulation_code(
            ch, px, rate, blocklength, epsilon, seed=derive_seed(rng.master_seed, *rng.path, "codebook")
        )
    for i in range(trials):
        trial = rng.child("trial", i)
        x = sample_iid(px, blocklength, trial.child("source"))
        if mode == "explicit":
            m, fb = emulate_encode_status(cb, x)
            y = emulate_decode(cb, m)
        else:
            y, fb = ensemble_emulate(joint, x, rate, epsilon, trial.child("cover"))
        fallbacks += int(fb)
        emp = joint_counts(x, y, joint.shape) / blocklength
        tvs[i] = total_variation(emp, joint.probs)
        # channel part: the channel applied to the realized source type
        channel_tvs[i] = total_variation(emp, emp.sum(axis=1, keepdims=True) * w)
    return FidelityStats(
        rate=float(rate),
        blocklength=int(blocklength),
        margin=float(rate - mutual_information(joint)),
        mean_tv=float(tvs.mean()),
        median_tv=float(np.median(tvs)),
        fallback_rate=fallbacks / trials,
        mode=mode,
        tvs=tvs,
        median_channel_tv=float(np.median(channel_tvs)),
        channel_tvs=channel_tvs,
    )
