"""Random channel codes over a DMC.

Codewords are drawn i.i.d. from the capacity-achieving input law and
decoded by maximum likelihood (ties go to the smallest message index).
A joint-typicality decoder is available for fidelity experiments.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..channels import Dmc, transmit_with_uniforms
from ..coding_theorems import ba_capacity
from ..errors import InvalidArgument, ResourceLimit
from ..info_core import JointPmf, Pmf, as_pmf, as_sequence, typical_count_bounds
from ..rng import RngStream, open_uniform

MAX_MESSAGE_BITS = 22
# cap on the (trials x messages) score matrix held at once
_SCORE_CELLS = 1 << 23
# slack for floor(N R) when R is a ratio such as k / N
_FLOOR_SLACK = 1e-9


def message_bits(blocklength: int, rate: float) -> int:
    """``floor(N R)``, robust to ``R = k / N`` rounding down."""
    return int(math.floor(blocklength * rate + _FLOOR_SLACK))


def sample_iid(law: Pmf, shape, stream: RngStream) -> np.ndarray:
    """I.i.d. symbols from ``law`` by inverse CDF on the stream's uniforms."""
    cum = np.cumsum(law.probs)
    cum[-1] = np.inf
    u = open_uniform(stream.generator(), shape)
    return np.searchsorted(cum, u, side="right").astype(np.int64)


def compact_dtype(alphabet_size: int):
    return np.uint8 if alphabet_size <= 256 else np.int64


@dataclass(frozen=True, eq=False)
class ChannelCodebook:
    """``2^floor(N R)`` codewords of length ``N`` drawn i.i.d. from ``input_law``."""

    rate: float
    blocklength: int
    codewords: np.ndarray
    seed: int
    input_law: Pmf
    channel_fingerprint: str
    degenerate: bool = False

    @property
    def bits(self) -> int:
        return int(round(math.log2(self.codewords.shape[0])))

    @property
    def size(self) -> int:
        return int(self.codewords.shape[0])

    def descriptor(self) -> dict:
        return {
            "type": "channel",
            "rate": self.rate,
            "blocklength": self.blocklength,
            "bits": self.bits,
            "seed": self.seed,
            "channel": self.channel_fingerprint,
        }


def build_channel_code(
    ch: Dmc,
    rate: float,
    blocklength: int,
    seed: int,
    input_law: Pmf | np.ndarray | None = None,
) -> ChannelCodebook:
    """Random code at rate ``R`` and blocklength ``N`` for ``ch``.

    ``input_law`` defaults to the Blahut-Arimoto optimal input.  When the
    channel has zero capacity the codebook is still built, but
    ``degenerate`` is set and a ``RuntimeWarning`` is emitted.
    """
    if rate <= 0:
        raise InvalidArgument("rate must be positive")
    if blocklength < 1:
        raise InvalidArgument("blocklength must be >= 1")
    k = message_bits(blocklength, rate)
    if k < 1:
        raise InvalidArgument(f"floor(N R) = {k}; need at least one message bit")
    if k > MAX_MESSAGE_BITS:
        raise ResourceLimit(f"codebook needs 2^{k} codewords; the cap is 2^{MAX_MESSAGE_BITS}")
    cap = ba_capacity(ch)
    law = as_pmf(input_law) if input_law is not None else cap.optimal_input
    if law.alphabet_size != ch.input_size:
        raise InvalidArgument("input law does not match the channel input alphabet")
    degenerate = cap.capacity <= 1e-12
    if degenerate:
        warnings.warn("channel has zero capacity; decoding will fail", RuntimeWarning, stacklevel=2)
    words = sample_iid(law, (1 << k, blocklength), RngStream(seed, ("channel_code",)))
    words = words.astype(compact_dtype(ch.input_size))
    words.setflags(write=False)
    return ChannelCodebook(
        rate=float(rate),
        blocklength=int(blocklength),
        codewords=words,
        seed=int(seed),
        input_law=law,
        channel_fingerprint=ch.fingerprint(),
        degenerate=degenerate,
    )


def channel_encode(cb: ChannelCodebook, message: int) -> np.ndarray:
    if not 0 <= int(message) < cb.size:
        raise InvalidArgument(f"message {message} out of range [0, {cb.size})")
    return cb.codewords[int(message)].astype(np.int64)


# stand-in for log 0; keeps score arithmetic finite so ties stay exact
_LOG_ZERO = -1e6


def _log_transitions(ch: Dmc) -> np.ndarray:
    w = ch.transitions
    return np.where(w > 0, np.log(np.where(w > 0, w, 1.0)), _LOG_ZERO)


def _score_terms(ch: Dmc):
    # score(m) = sum_{x>=1, y<last} n_xy(m) A[x, y] + sum_{x>=1} c_x(m) B[x] + const
    L = _log_transitions(ch)
    A = L - L[0:1, :] - L[:, -1:] + L[0, -1]
    B = L[:, -1] - L[0, -1]
    return A[1:, :-1], B[1:]


def log_likelihoods(cb: ChannelCodebook, received: np.ndarray, ch: Dmc) -> np.ndarray:
    """``(T, M)`` matrix of ``log p(y^N | codeword m)`` up to a per-row constant.

    Scores are computed from the exact joint-type counts of each
    (codeword, output) pair, so codewords with equal likelihood get
    bit-identical scores and ties resolve to the smallest index.
    """
    y = np.atleast_2d(np.asarray(received, dtype=np.int64))
    if y.shape[1] != cb.blocklength:
        raise InvalidArgument(f"received length {y.shape[1]} != blocklength {cb.blocklength}")
    if y.size and (y.min() < 0 or y.max() >= ch.output_size):
        raise InvalidArgument("received symbol out of range")
    return _scores(cb.codewords, y, ch).T


def _scores(words: np.ndarray, y: np.ndarray, ch: Dmc) -> np.ndarray:
    A, B = _score_terms(ch)
    kx, ky = ch.input_size, ch.output_size
    out = np.zeros((words.shape[0], y.shape[0]))
    ys = [(y == b).astype(np.float32).T for b in range(ky - 1)]
    for a in range(1, kx):
        xa = (words == a).astype(np.float32)
        out += xa.sum(axis=1, dtype=np.float64)[:, None] * B[a - 1]
        for b in range(ky - 1):
            if A[a - 1, b] != 0.0:
                # float32 matmul of 0/1 matrices is exact for counts < 2^24
                out += (xa @ ys[b]).astype(np.float64) * A[a - 1, b]
    return out


def _ml_decode(cb: ChannelCodebook, y: np.ndarray, ch: Dmc) -> np.ndarray:
    rows = max(1, min(y.shape[0], 4096))
    chunk = max(1, _SCORE_CELLS // rows)
    out = np.empty(y.shape[0], dtype=np.int64)
    for r0 in range(0, y.shape[0], rows):
        yb = y[r0 : r0 + rows]
        best = np.full(yb.shape[0], -np.inf)
        arg = np.zeros(yb.shape[0], dtype=np.int64)
        for c0 in range(0, cb.size, chunk):
            sc = _scores(cb.codewords[c0 : c0 + chunk], yb, ch)
            i = np.argmax(sc, axis=0)
            v = sc[i, np.arange(yb.shape[0])]
            better = v > best
            best[better] = v[better]
            arg[better] = c0 + i[better]
        out[r0 : r0 + rows] = arg
    return out


def channel_decode(
    cb: ChannelCodebook,
    received,
    ch: Dmc,
    rule: str = "ml",
    epsilon: float = 0.1,
) -> int | None:
    """Decode one received block.

    ``rule="ml"`` returns the maximum-likelihood message (smallest index on
    ties) and never fails.  ``rule="typical"`` returns the unique message
    jointly ``epsilon``-typical with the output, or ``None``.
    """
    y = as_sequence(received, ch.output_size)
    m = int(channel_decode_batch(cb, y[None, :], ch, rule=rule, epsilon=epsilon)[0])
    return None if m < 0 else m


def channel_decode_batch(
    cb: ChannelCodebook,
    received: np.ndarray,
    ch: Dmc,
    rule: str = "ml",
    epsilon: float = 0.1,
) -> np.ndarray:
    """Vectorized decoding of ``(T, N)`` outputs; typicality failures are ``-1``."""
    y = np.atleast_2d(np.asarray(received, dtype=np.int64))
    if rule == "ml":
        if y.shape[1] != cb.blocklength:
            raise InvalidArgument(f"received length {y.shape[1]} != blocklength {cb.blocklength}")
        if y.size and (y.min() < 0 or y.max() >= ch.output_size):
            raise InvalidArgument("received symbol out of range")
        return _ml_decode(cb, y, ch)
    if rule != "typical":
        raise InvalidArgument(f"unknown decoding rule {rule!r}")
    joint = JointPmf.from_channel(cb.input_law, ch.transitions)
    lo, hi = typical_count_bounds(joint.probs, cb.blocklength, epsilon)
    kx, ky = joint.shape
    out = np.full(y.shape[0], -1, dtype=np.int64)
    cw = cb.codewords.astype(np.int64)
    for i, row in enumerate(y):
        cells = cw * ky + row[None, :]
        counts = np.zeros((cb.size, kx * ky), dtype=np.int64)
        for c in range(kx * ky):
            counts[:, c] = (cells == c).sum(axis=1)
        ok = np.all((counts >= lo.ravel()) & (counts <= hi.ravel()), axis=1)
        hits = np.flatnonzero(ok)
        if hits.size == 1:
            out[i] = hits[0]
    return out


def transmit_codewords(
    cb: ChannelCodebook, ch: Dmc, messages: np.ndarray, stream: RngStream
) -> np.ndarray:
    """Send ``messages`` (one per row) through ``ch`` with noise from ``stream``."""
    x = cb.codewords[np.asarray(messages, dtype=np.int64)].astype(np.int64)
    u = open_uniform(stream.generator(), x.shape)
    return transmit_with_uniforms(ch, x, u)


@dataclass(frozen=True)
class MaxErrorEstimate:
    """Monte Carlo estimate of the maximal message error probability.

    ``max_error`` is the largest per-message error frequency among visited
    messages; when some messages were never sampled, ``complete`` is
    false and ``max_error`` is only a lower estimate of the true maximum.
    """

    max_error: float
    mean_error: float
    trials: int
    visited: int
    unvisited: int
    per_message_errors: np.ndarray
    per_message_trials: np.ndarray

    @property
    def complete(self) -> bool:
        return self.unvisited == 0


def estimate_max_error(
    cb: ChannelCodebook,
    ch: Dmc,
    trials: int,
    rng: RngStream,
    rule: str = "ml",
    batch: int = 4096,
) -> MaxErrorEstimate:
    """Estimate ``P_e^(M)`` by uniform message sampling with per-message tallies."""
    if trials < 1:
        raise InvalidArgument("trials must be >= 1")
    msgs = rng.child("messages").integers(0, cb.size, size=trials)
    errors = np.zeros(cb.size, dtype=np.int64)
    hits = np.zeros(cb.size, dtype=np.int64)
    for start in range(0, trials, batch):
        m = msgs[start : start + batch]
        y = transmit_codewords(cb, ch, m, rng.child("noise", start))
        dec = channel_decode_batch(cb, y, ch, rule=rule)
        np.add.at(hits, m, 1)
        np.add.at(errors, m, (dec != m).astype(np.int64))
    seen = hits > 0
    rates = np.where(seen, errors / np.maximum(hits, 1), 0.0)
    return MaxErrorEstimate(
        max_error=float(rates[seen].max()) if seen.any() else 1.0,
        mean_error=float(errors.sum() / trials),
        trials=int(trials),
        visited=int(seen.sum()),
        unvisited=int((~seen).sum()),
        per_message_errors=errors,
        per_message_trials=hits,
    )


def bhattacharyya_max_error_bound(cb: ChannelCodebook, ch: Dmc, chunk: int = 512) -> float:
    """Union-Bhattacharyya upper bound on the maximal ML error probability.

    ``P_e(m) <= sum_{m' != m} prod_t Z(c_mt, c_m't)`` with
    ``Z(x, x') = sum_y sqrt(W(y|x) W(y|x'))``.  Duplicate codewords give a
    bound of 1.
    """
    if np.unique(cb.codewords, axis=0).shape[0] < cb.size:
        return 1.0
    w = ch.transitions
    z = np.sqrt(w) @ np.sqrt(w).T
    with np.errstate(divide="ignore"):
        logz = np.log(np.minimum(z, 1.0))
    # exp(-1e4) underflows to 0, so the finite stand-in keeps the bound exact
    logz = np.maximum(logz, -1e4)
    kx = ch.input_size
    n = cb.blocklength
    onehot = np.zeros((cb.size, n, kx))
    np.put_along_axis(onehot, cb.codewords.astype(np.int64)[:, :, None], 1.0, axis=2)
    left = (onehot @ logz).reshape(cb.size, n * kx)
    right = onehot.reshape(cb.size, n * kx)
    worst = 0.0
    for start in range(0, cb.size, chunk):
        block = left[start : start + chunk] @ right.T
        idx = np.arange(start, min(start + chunk, cb.size))
        block[idx - start, idx] = -np.inf
        total = np.exp(block).sum(axis=1)
        worst = max(worst, float(total.max()))
        if worst >= 1.0:
            return 1.0
    return worst
