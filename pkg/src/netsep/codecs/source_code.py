"""Source codes used over bit pipes.

``RdCodebook`` is a random lossy code: ``2^bits`` reproduction words
drawn i.i.d. from the optimal reproduction law, with minimum-distortion
encoding.  ``TypicalSetCode`` is a lossless fixed-rate code that indexes
the robust typical set (atypical blocks map to index 0 and are counted as
errors by the caller).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..coding_theorems import DistortionMeasure, ba_rate_distortion, rd_extremes
from ..errors import InvalidArgument, ResourceLimit
from ..info_core import Pmf, as_pmf, as_sequence, typical_count_bounds
from ..rng import RngStream
from .channel_code import MAX_MESSAGE_BITS, compact_dtype, sample_iid

_SCORE_CELLS = 1 << 23


@dataclass(frozen=True, eq=False)
class RdCodebook:
    bits: int
    blocklength: int
    measure: DistortionMeasure
    reproduction_law: Pmf
    seed: int
    codewords: np.ndarray

    @property
    def size(self) -> int:
        return int(self.codewords.shape[0])

    def descriptor(self) -> dict:
        return {"type": "rate_distortion", "bits": self.bits, "blocklength": self.blocklength, "seed": self.seed}


def build_rd_code(
    src: Pmf,
    measure: DistortionMeasure,
    bits: int,
    blocklength: int,
    seed: int,
    reproduction_law: Pmf | None = None,
) -> RdCodebook:
    """Random rate-distortion code of rate ``bits / blocklength``.

    The reproduction law defaults to the output marginal of the optimal
    test channel at that rate, found by bisection on the distortion.
    """
    if bits < 0 or blocklength < 1:
        raise InvalidArgument("need bits >= 0 and blocklength >= 1")
    if bits > MAX_MESSAGE_BITS:
        raise ResourceLimit(f"2^{bits} reproduction words exceed the desk-scale cap")
    law = as_pmf(reproduction_law) if reproduction_law is not None else _reproduction_law(
        as_pmf(src), measure, bits / blocklength
    )
    words = sample_iid(law, (1 << bits, blocklength), RngStream(seed, ("rd_code",)))
    words = words.astype(compact_dtype(law.alphabet_size))
    words.setflags(write=False)
    return RdCodebook(bits, blocklength, measure, law, int(seed), words)


def _reproduction_law(src: Pmf, measure: DistortionMeasure, rate: float) -> Pmf:
    d_min, d_max = rd_extremes(src, measure)
    lo, hi = d_min, d_max
    res = ba_rate_distortion(src, measure, d_max)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        r = ba_rate_distortion(src, measure, mid)
        if r.rate > rate:
            lo = mid
        else:
            hi, res = mid, r
    q = src.probs @ res.test_channel
    return Pmf(q / q.sum())


def rd_encode(cb: RdCodebook, blocks: np.ndarray) -> np.ndarray:
    """Minimum-distortion indices (smallest on ties) for ``(T, L)`` source blocks."""
    u = np.atleast_2d(np.asarray(blocks, dtype=np.int64))
    if u.shape[1] != cb.blocklength:
        raise InvalidArgument(f"block length {u.shape[1]} != {cb.blocklength}")
    table = cb.measure.table
    out = np.empty(u.shape[0], dtype=np.int64)
    rows = max(1, _SCORE_CELLS // cb.size)
    for start in range(0, u.shape[0], rows):
        ub = u[start : start + rows]
        cost = np.zeros((ub.shape[0], cb.size))
        for t in range(cb.blocklength):
            cost += table[ub[:, t]][:, cb.codewords[:, t]]
        out[start : start + rows] = np.argmin(cost, axis=1)
    return out


def rd_decode(cb: RdCodebook, indices) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= cb.size):
        raise InvalidArgument("reproduction index out of range")
    return cb.codewords[idx].astype(np.int64)


# --------------------------------------------------------------------------
# Lossless typical-set indexing


def _multinomial(counts) -> int:
    total, out = 0, 1
    for c in counts:
        total += int(c)
        out *= math.comb(total, int(c))
    return out


@dataclass(frozen=True, eq=False)
class TypicalSetCode:
    """Fixed-rate index of the ``epsilon``-typical length-``L`` sequences of ``p``."""

    law: Pmf
    blocklength: int
    epsilon: float

    @cached_property
    def _types(self) -> list[tuple[tuple[int, ...], int]]:
        lo, hi = typical_count_bounds(self.law.probs, self.blocklength, self.epsilon)
        types: list[tuple[int, ...]] = []

        def rec(j, left, acc):
            if j == len(lo) - 1:
                if lo[j] <= left <= hi[j]:
                    types.append(tuple(acc + [left]))
                return
            for c in range(int(lo[j]), int(min(hi[j], left)) + 1):
                rec(j + 1, left - c, acc + [c])

        rec(0, self.blocklength, [])
        out, offset = [], 0
        for t in types:
            out.append((t, offset))
            offset += _multinomial(t)
        return out

    @property
    def count(self) -> int:
        t = self._types
        return 0 if not t else t[-1][1] + _multinomial(t[-1][0])

    @property
    def bits(self) -> int:
        return max(1, math.ceil(math.log2(max(self.count, 1))))

    def covers(self, block) -> bool:
        u = as_sequence(block, self.law.alphabet_size)
        counts = tuple(np.bincount(u, minlength=self.law.alphabet_size).tolist())
        return any(t == counts for t, _ in self._types)

    def encode(self, block) -> int:
        """Index of a typical block; 0 for atypical blocks."""
        u = as_sequence(block, self.law.alphabet_size)
        counts = np.bincount(u, minlength=self.law.alphabet_size)
        key = tuple(counts.tolist())
        for t, offset in self._types:
            if t == key:
                return offset + _rank(u, counts.copy())
        return 0

    def decode(self, index: int) -> np.ndarray:
        if not 0 <= index < max(self.count, 1):
            raise InvalidArgument("index outside the typical set")
        for t, offset in reversed(self._types):
            if index >= offset:
                return _unrank(index - offset, np.array(t), self.blocklength)
        raise InvalidArgument("empty typical set")


def _rank(u: np.ndarray, counts: np.ndarray) -> int:
    """Lexicographic rank of ``u`` among sequences with the same counts."""
    rank = 0
    for sym in u:
        for smaller in range(int(sym)):
            if counts[smaller] > 0:
                counts[smaller] -= 1
                rank += _multinomial(counts)
                counts[smaller] += 1
        counts[sym] -= 1
    return rank


def _unrank(rank: int, counts: np.ndarray, n: int) -> np.ndarray:
    counts = counts.copy()
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        for sym in range(counts.shape[0]):
            if counts[sym] == 0:
                continue
            counts[sym] -= 1
            block = _multinomial(counts)
            if rank < block:
                out[i] = sym
                break
            rank -= block
            counts[sym] += 1
    return out
