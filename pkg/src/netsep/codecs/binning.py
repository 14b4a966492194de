"""Slepian-Wolf random binning.

Bins come from tabulation hashing: each (position, symbol) pair owns a
random 64-bit word, a sequence hashes to the XOR of its words, and the
bin index is the top ``k = floor(L R0)`` bits.  Tabulation hashing is
3-wise independent, which is as good as a fully random binning for the
error events of the decoder.

Two decoders are offered.  ``typical`` enumerates the sequences jointly
typical with the side information and keeps those in the bin.  ``ml``
searches a Hamming ball around the per-position MAP guess and returns
the most likely bin member, which is the useful rule at short
blocklengths where the typical shell is tiny or empty.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgument, ResourceLimit
from ..info_core import JointPmf, as_joint, as_sequence, typical_count_bounds
from ..rng import RngStream
from .channel_code import message_bits

MAX_CANDIDATES = 1 << 22
DEFAULT_BALL = 1 << 20


@dataclass(frozen=True, eq=False)
class BinningCode:
    rate: float
    blocklength: int
    alphabet_size: int
    seed: int
    epsilon: float
    table: np.ndarray
    _flip_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def bits(self) -> int:
        return message_bits(self.blocklength, self.rate)

    @property
    def num_bins(self) -> int:
        return 1 << self.bits

    def descriptor(self) -> dict:
        return {
            "type": "binning",
            "rate": self.rate,
            "blocklength": self.blocklength,
            "bits": self.bits,
            "alphabet_size": self.alphabet_size,
            "seed": self.seed,
            "epsilon": self.epsilon,
        }


def build_binning_code(
    rate: float, blocklength: int, alphabet_size: int, seed: int, epsilon: float = 0.1
) -> BinningCode:
    if rate < 0:
        raise InvalidArgument("rate must be non-negative")
    if blocklength < 1 or alphabet_size < 1:
        raise InvalidArgument("blocklength and alphabet size must be positive")
    if message_bits(blocklength, rate) > 63:
        raise ResourceLimit("at most 63 bin bits are supported")
    gen = RngStream(seed, ("binning",)).generator()
    table = gen.integers(0, 2**64, size=(blocklength, alphabet_size), dtype=np.uint64)
    table.setflags(write=False)
    return BinningCode(
        rate=float(rate),
        blocklength=int(blocklength),
        alphabet_size=int(alphabet_size),
        seed=int(seed),
        epsilon=float(epsilon),
        table=table,
    )


def _top_bits(h: np.ndarray, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros(h.shape, dtype=np.int64)
    return (h >> np.uint64(64 - k)).astype(np.int64)


def _hash_rows(bc: BinningCode, seqs: np.ndarray) -> np.ndarray:
    words = bc.table[np.arange(bc.blocklength)[None, :], seqs]
    return np.bitwise_xor.reduce(words, axis=1)


def sw_bins(bc: BinningCode, seqs: np.ndarray) -> np.ndarray:
    """Bin indices of a ``(T, L)`` batch of sequences."""
    s = np.atleast_2d(np.asarray(seqs, dtype=np.int64))
    if s.shape[1] != bc.blocklength:
        raise InvalidArgument(f"sequence length {s.shape[1]} != blocklength {bc.blocklength}")
    if s.size and (s.min() < 0 or s.max() >= bc.alphabet_size):
        raise InvalidArgument("symbol out of range")
    return _top_bits(_hash_rows(bc, s), bc.bits)


def sw_encode(bc: BinningCode, un) -> int:
    u = as_sequence(un, bc.alphabet_size)
    return int(sw_bins(bc, u[None, :])[0])


@dataclass(frozen=True)
class SwDecodeResult:
    """``sequence`` is set only when ``status == "ok"``."""

    status: str
    sequence: np.ndarray | None
    candidates: int

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _typical_shell(side: np.ndarray, joint: JointPmf, epsilon: float) -> np.ndarray:
    """All ``u^L`` jointly typical with ``side`` (rows of the returned array)."""
    n = side.size
    ku, kv = joint.shape
    lo, hi = typical_count_bounds(joint.probs, n, epsilon)
    per_class = []
    for b in range(kv):
        pos = np.flatnonzero(side == b)
        m = pos.size
        choices = []
        for counts in _count_vectors(lo[:, b], hi[:, b], m):
            choices.extend(_arrangements(counts, m))
        if not choices:
            return np.zeros((0, n), dtype=np.int64)
        per_class.append((pos, np.array(choices, dtype=np.int64).reshape(len(choices), m)))
    total = math.prod(c.shape[0] for _, c in per_class)
    if total > MAX_CANDIDATES:
        raise ResourceLimit(f"typical shell has {total} sequences; cap is {MAX_CANDIDATES}")
    out = np.zeros((total, n), dtype=np.int64)
    reps = total
    tile = 1
    for pos, c in per_class:
        reps //= c.shape[0]
        block = np.repeat(c, reps, axis=0)
        out[:, pos] = np.tile(block, (tile, 1))
        tile *= c.shape[0]
    return out


def _count_vectors(lo: np.ndarray, hi: np.ndarray, m: int):
    k = lo.shape[0]

    def rec(j, left, acc):
        if j == k - 1:
            if lo[j] <= left <= hi[j]:
                yield acc + [left]
            return
        for c in range(int(lo[j]), int(min(hi[j], left)) + 1):
            yield from rec(j + 1, left - c, acc + [c])

    if k == 0:
        return
    yield from rec(0, m, [])


def _arrangements(counts: list[int], m: int) -> list[tuple[int, ...]]:
    """Distinct sequences of length m with the given symbol counts."""
    out = []

    def rec(free: tuple[int, ...], j: int, seq: list[int]):
        if j == len(counts) - 1:
            for p in free:
                seq[p] = j
            out.append(tuple(seq))
            return
        for chosen in itertools.combinations(free, counts[j]):
            chosen_set = set(chosen)
            for p in chosen:
                seq[p] = j
            rec(tuple(p for p in free if p not in chosen_set), j + 1, seq)

    rec(tuple(range(m)), 0, [0] * m)
    return out


def _ball_radius(n: int, k: int, budget: int) -> int:
    size, r = 1, 0
    while r < n:
        nxt = size + math.comb(n, r + 1) * (k - 1) ** (r + 1)
        if nxt > budget:
            break
        size, r = nxt, r + 1
    return r


def _flip_patterns(n: int, radius: int) -> list[np.ndarray]:
    """Position sets of every Hamming pattern of weight <= radius, grouped by weight."""
    return [_as_rows(itertools.combinations(range(n), w), math.comb(n, w), w) for w in range(radius + 1)]


def _as_rows(items, count: int, width: int) -> np.ndarray:
    # reshape(-1, 0) is ambiguous, so the row count is passed explicitly
    return np.array(list(items), dtype=np.int64).reshape(count, width)


def _binary_ball_deltas(bc: BinningCode, radius: int):
    key = ("binary", radius)
    if key not in bc._flip_cache:
        flip = bc.table[:, 0] ^ bc.table[:, 1]
        groups = _flip_patterns(bc.blocklength, radius)
        deltas = [np.bitwise_xor.reduce(flip[g], axis=1) if g.shape[1] else np.zeros(g.shape[0], np.uint64)
                  for g in groups]
        bc._flip_cache[key] = (groups, deltas)
    return bc._flip_cache[key]


def _ml_candidates(bc: BinningCode, bin_index: int, guess: np.ndarray, radius: int) -> np.ndarray:
    n, k = bc.blocklength, bc.alphabet_size
    if k == 2:
        groups, deltas = _binary_ball_deltas(bc, radius)
        base = _hash_rows(bc, guess[None, :])[0]
        found = []
        for g, d in zip(groups, deltas):
            hit = np.flatnonzero(_top_bits(base ^ d, bc.bits) == bin_index)
            for row in g[hit]:
                c = guess.copy()
                c[row] ^= 1
                found.append(c)
        return np.array(found, dtype=np.int64).reshape(-1, n)
    found = []
    for w in range(radius + 1):
        for pos in itertools.combinations(range(n), w):
            pos = list(pos)
            shifts = _as_rows(itertools.product(range(1, k), repeat=w), (k - 1) ** w, w)
            cands = np.repeat(guess[None, :], shifts.shape[0], axis=0)
            cands[:, pos] = (cands[:, pos] + shifts) % k
            hit = sw_bins(bc, cands) == bin_index
            found.extend(cands[hit])
    return np.array(found, dtype=np.int64).reshape(-1, n)


def sw_decode(
    bc: BinningCode,
    bin_index: int,
    side_info,
    joint: JointPmf | np.ndarray,
    method: str = "typical",
    radius: int | None = None,
) -> SwDecodeResult:
    """Recover ``u^L`` from its bin and the side information ``v^L``.

    ``joint`` is ``p(u, v)`` (rows: source symbol, columns: side
    information).  Failures are reported as ``status`` ``"none"`` (no
    acceptable bin member) or ``"ambiguous"`` (several).
    """
    jt = as_joint(joint)
    v = as_sequence(side_info, jt.shape[1])
    if v.size != bc.blocklength:
        raise InvalidArgument(f"side information length {v.size} != blocklength {bc.blocklength}")
    if jt.shape[0] != bc.alphabet_size:
        raise InvalidArgument("joint pmf rows do not match the code alphabet")
    if not 0 <= int(bin_index) < bc.num_bins:
        raise InvalidArgument(f"bin {bin_index} out of range")
    if method == "typical":
        shell = _typical_shell(v, jt, bc.epsilon)
        members = shell[sw_bins(bc, shell) == bin_index] if shell.shape[0] else shell
        examined = shell.shape[0]
        if members.shape[0] == 1:
            return _checked(bc, bin_index, SwDecodeResult("ok", members[0], examined))
        return SwDecodeResult("none" if members.shape[0] == 0 else "ambiguous", None, examined)
    if method != "ml":
        raise InvalidArgument(f"unknown decoding method {method!r}")
    with np.errstate(divide="ignore"):
        logp = np.log(_posterior(jt))
    guess = np.argmax(logp[:, v], axis=0).astype(np.int64)
    if bc.bits == 0:
        # a single bin: ML is the letterwise MAP, unique unless some letter ties
        cols = logp[:, v]
        if not np.all(np.isfinite(cols[guess, np.arange(v.size)])):
            return SwDecodeResult("none", None, 1)
        ties = (cols >= cols.max(axis=0, keepdims=True) - 1e-12).sum(axis=0) > 1
        if ties.any():
            return SwDecodeResult("ambiguous", None, 1)
        return _checked(bc, bin_index, SwDecodeResult("ok", guess, 1))
    r =_ball_radius(bc.blocklength, bc.alphabet_size, DEFAULT_BALL) if radius is None else int(radius)
    members = _ml_candidates(bc, int(bin_index), guess, r)
    if members.shape[0] == 0:
        return SwDecodeResult("none", None, 0)
    scores = logp[members, v[None, :]].sum(axis=1)
    best = scores.max()
    if not np.isfinite(best):
        return SwDecodeResult("none", None, members.shape[0])
    top = np.flatnonzero(scores >= best - 1e-9 * max(1.0, abs(best)))
    if top.size > 1:
        return SwDecodeResult("ambiguous", None, members.shape[0])
    return _checked(bc, bin_index, SwDecodeResult("ok", members[top[0]], members.shape[0]))


def _posterior(jt: JointPmf) -> np.ndarray:
    """``p(u | v)`` as a ``|U| x |V|`` matrix; columns with ``p(v) = 0`` are uniform."""
    p = jt.probs
    pv = p.sum(axis=0, keepdims=True)
    out = np.full_like(p, 1.0 / p.shape[0])
    np.divide(p, pv, out=out, where=np.broadcast_to(pv > 0, p.shape))
    return out


def _checked(bc: BinningCode, bin_index: int, res: SwDecodeResult) -> SwDecodeResult:
    # a decoded sequence must hash back into the claimed bin
    if sw_encode(bc, res.sequence) != bin_index:
        raise AssertionError("decoder returned a sequence outside the claimed bin")
    return res
