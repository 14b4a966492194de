"""Finite-alphabet probability primitives.

Distributions are dense vectors/matrices indexed by integer symbols
``0..k-1``.  Information quantities are in bits and use ``0 log 0 = 0``.
Typicality is the robust (multiplicative) definition: a sequence is
epsilon-typical for ``p`` when every empirical frequency lies within
``epsilon * p(x)`` of ``p(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidArgument

NORMALIZATION_TOL = 1e-12

ArrayLike = Union[np.ndarray, list, tuple]


def _check_probs(probs: np.ndarray, what: str) -> None:
    if probs.size == 0:
        raise InvalidArgument(f"{what} must be non-empty")
    if not np.all(np.isfinite(probs)):
        raise InvalidArgument(f"{what} has non-finite entries")
    if np.any(probs < 0):
        raise InvalidArgument(f"{what} has negative entries")
    total = float(probs.sum())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise InvalidArgument(f"{what} sums to {total!r}, not 1")


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function on ``{0, ..., alphabet_size - 1}``."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1:
            raise InvalidArgument("Pmf needs a 1-D probability vector")
        _check_probs(probs, "Pmf")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def alphabet_size(self) -> int:
        return int(self.probs.shape[0])

    @classmethod
    def uniform(cls, k: int) -> "Pmf":
        return cls(np.full(k, 1.0 / k))

    @classmethod
    def bernoulli(cls, p: float) -> "Pmf":
        return cls(np.array([1.0 - p, p]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Pmf):
            return NotImplemented
        return self.probs.shape == other.probs.shape and bool(np.all(self.probs == other.probs))

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())

    def __repr__(self) -> str:
        return f"Pmf({np.array2string(self.probs, precision=6)})"


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Joint pmf ``p(x, y)`` stored as an ``|X| x |Y|`` matrix."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 2:
            raise InvalidArgument("JointPmf needs a 2-D probability matrix")
        _check_probs(probs, "JointPmf")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_channel(cls, p_x: "Pmf | ArrayLike", transitions: ArrayLike) -> "JointPmf":
        """``p(x) p(y|x)`` for an input law and a row-stochastic matrix."""
        px = as_pmf(p_x).probs
        w = np.asarray(transitions, dtype=float)
        if w.shape[0] != px.shape[0]:
            raise InvalidArgument("input law and channel disagree on |X|")
        return cls(px[:, None] * w)

    @classmethod
    def product(cls, p: "Pmf | ArrayLike", q: "Pmf | ArrayLike") -> "JointPmf":
        return cls(np.outer(as_pmf(p).probs, as_pmf(q).probs))

    @property
    def shape(self) -> tuple[int, int]:
        return self.probs.shape  # type: ignore[return-value]

    def marginal_x(self) -> Pmf:
        return Pmf(_renormalized(self.probs.sum(axis=1)))

    def marginal_y(self) -> Pmf:
        return Pmf(_renormalized(self.probs.sum(axis=0)))

    def conditional_y_given_x(self) -> np.ndarray:
        """Row-stochastic ``p(y|x)``; rows with ``p(x) = 0`` are uniform."""
        px = self.probs.sum(axis=1, keepdims=True)
        out = np.full_like(self.probs, 1.0 / self.probs.shape[1])
        np.divide(self.probs, px, out=out, where=np.broadcast_to(px > 0, self.probs.shape))
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, JointPmf):
            return NotImplemented
        return self.probs.shape == other.probs.shape and bool(np.all(self.probs == other.probs))

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())

    def __repr__(self) -> str:
        return f"JointPmf({np.array2string(self.probs, precision=6)})"


def _renormalized(v: np.ndarray) -> np.ndarray:
    # marginal sums of a valid joint can drift by an ulp or two
    return v / v.sum()


def as_pmf(p: "Pmf | ArrayLike") -> Pmf:
    return p if isinstance(p, Pmf) else Pmf(np.asarray(p, dtype=float))


def as_joint(j: "JointPmf | ArrayLike") -> JointPmf:
    return j if isinstance(j, JointPmf) else JointPmf(np.asarray(j, dtype=float))


def as_sequence(x: ArrayLike, alphabet_size: int | None = None) -> np.ndarray:
    """Validate and return a 1-D integer symbol array."""
    seq = np.asarray(x)
    if seq.ndim != 1:
        raise InvalidArgument("a sequence must be 1-D")
    if seq.size and not np.issubdtype(seq.dtype, np.integer):
        if not np.all(seq == np.round(seq)):
            raise InvalidArgument("sequence symbols must be integers")
    seq = seq.astype(np.int64, copy=False)
    if seq.size and seq.min() < 0:
        raise InvalidArgument("sequence symbols must be non-negative")
    if alphabet_size is not None and seq.size and seq.max() >= alphabet_size:
        raise InvalidArgument(
            f"symbol {int(seq.max())} out of range for alphabet of size {alphabet_size}"
        )
    return seq


def empirical(xn: ArrayLike, alphabet_size: int) -> Pmf:
    """Empirical distribution (type) of a sequence."""
    seq = as_sequence(xn, alphabet_size)
    if seq.size == 0:
        raise InvalidArgument("empirical distribution of an empty sequence")
    counts = np.bincount(seq, minlength=alphabet_size)
    return Pmf(counts / seq.size)


def joint_counts(xn: ArrayLike, yn: ArrayLike, shape: tuple[int, int]) -> np.ndarray:
    x = as_sequence(xn, shape[0])
    y = as_sequence(yn, shape[1])
    if x.shape != y.shape:
        raise InvalidArgument(f"length mismatch: {x.size} vs {y.size}")
    return np.bincount(x * shape[1] + y, minlength=shape[0] * shape[1]).reshape(shape)


def joint_empirical(
    xn: ArrayLike, yn: ArrayLike, shape: tuple[int, int] | None = None
) -> JointPmf:
    """Joint empirical distribution of a pair of equal-length sequences.

    ``shape`` defaults to ``(max(x) + 1, max(y) + 1)``.
    """
    x = as_sequence(xn)
    y = as_sequence(yn)
    if x.shape != y.shape:
        raise InvalidArgument(f"length mismatch: {x.size} vs {y.size}")
    if x.size == 0:
        raise InvalidArgument("joint empirical distribution of empty sequences")
    if shape is None:
        shape = (int(x.max()) + 1, int(y.max()) + 1)
    return JointPmf(joint_counts(x, y, shape) / x.size)


def total_variation(p: "Pmf | JointPmf | ArrayLike", q: "Pmf | JointPmf | ArrayLike") -> float:
    """Half the L1 distance between two distributions on the same alphabet."""
    a = p.probs if isinstance(p, (Pmf, JointPmf)) else np.asarray(p, dtype=float)
    b = q.probs if isinstance(q, (Pmf, JointPmf)) else np.asarray(q, dtype=float)
    if a.shape != b.shape:
        raise InvalidArgument(f"alphabet mismatch: {a.shape} vs {b.shape}")
    return float(min(1.0, 0.5 * np.abs(a - b).sum()))


def _xlog2x_sum(v: np.ndarray) -> float:
    nz = v[v > 0]
    return float(-(nz * np.log2(nz)).sum())


def entropy(p: "Pmf | JointPmf | ArrayLike") -> float:
    """Shannon entropy in bits; also accepts a joint pmf (joint entropy)."""
    v = p.probs if isinstance(p, (Pmf, JointPmf)) else np.asarray(p, dtype=float)
    return max(0.0, _xlog2x_sum(v.ravel()))


def binary_entropy(p: float) -> float:
    """``h(p) = -p log2 p - (1 - p) log2 (1 - p)``."""
    if not 0.0 <= p <= 1.0:
        raise InvalidArgument(f"binary entropy needs p in [0, 1], got {p}")
    return entropy(np.array([p, 1.0 - p]))


def mutual_information(j: "JointPmf | ArrayLike") -> float:
    """``I(X;Y)`` in bits, computed as a KL divergence to the product law."""
    p = as_joint(j).probs
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    mask = p > 0
    ratio = p[mask] / (px @ py)[mask]
    return max(0.0, float((p[mask] * np.log2(ratio)).sum()))


def conditional_entropy(j: "JointPmf | ArrayLike") -> float:
    """``H(X|Y) = H(X,Y) - H(Y)`` for the matrix ``p(x, y)``."""
    p = as_joint(j).probs
    return max(0.0, entropy(p) - entropy(p.sum(axis=0)))


def _within_band(counts: np.ndarray, probs: np.ndarray, n: int, epsilon: float) -> bool:
    # |count/n - p| <= eps * p, evaluated on counts to avoid rounding in count/n
    slack = 1e-9 * max(1.0, n * float(probs.max()))
    return bool(np.all(np.abs(counts - n * probs) <= epsilon * n * probs + slack))


def is_typical(xn: ArrayLike, p: "Pmf | ArrayLike", epsilon: float) -> bool:
    """Robust typicality: ``|pi(x|x^n) - p(x)| <= epsilon * p(x)`` for all x."""
    if epsilon <= 0:
        raise InvalidArgument("epsilon must be positive")
    pmf = as_pmf(p)
    seq = as_sequence(xn)
    if seq.size == 0:
        raise InvalidArgument("typicality of an empty sequence")
    if seq.max() >= pmf.alphabet_size:
        return False
    counts = np.bincount(seq, minlength=pmf.alphabet_size)
    return _within_band(counts, pmf.probs, seq.size, epsilon)


def is_jointly_typical(
    xn: ArrayLike, yn: ArrayLike, j: "JointPmf | ArrayLike", epsilon: float
) -> bool:
    """Joint robust typicality of ``(x^n, y^n)`` with respect to ``p(x, y)``.

    Also answers membership of ``y^n`` in the conditional typical set of
    ``x^n``, which is the same predicate.
    """
    if epsilon <= 0:
        raise InvalidArgument("epsilon must be positive")
    joint = as_joint(j)
    x = as_sequence(xn)
    y = as_sequence(yn)
    if x.shape != y.shape:
        raise InvalidArgument(f"length mismatch: {x.size} vs {y.size}")
    if x.size == 0:
        raise InvalidArgument("typicality of empty sequences")
    kx, ky = joint.shape
    if x.max() >= kx or y.max() >= ky:
        return False
    counts = np.bincount(x * ky + y, minlength=kx * ky).reshape(kx, ky)
    return _within_band(counts, joint.probs, x.size, epsilon)


def typical_count_bounds(
    probs: np.ndarray, n: int, epsilon: float
) -> tuple[np.ndarray, np.ndarray]:
    """Integer count ranges ``[lo, hi]`` admitted by robust typicality.

    Cells with zero probability get ``lo = hi = 0``.  An empty range is
    signalled by ``lo > hi``.
    """
    probs = np.asarray(probs, dtype=float)
    slack = 1e-9 * max(1.0, n * float(probs.max()))
    lo = np.ceil(n * probs * (1.0 - epsilon) - slack)
    hi = np.floor(n * probs * (1.0 + epsilon) + slack)
    lo = np.maximum(lo, 0).astype(np.int64)
    hi = np.minimum(hi, n).astype(np.int64)
    return lo, hi
