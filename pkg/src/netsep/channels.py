"""Point-to-point channel models.

Discrete memoryless channels are row-stochastic matrices.  AWGN links add
i.i.d. Gaussian noise; the ``Quantizer`` ladder Q[i] (step ``1/sqrt(i)``,
``2i+1`` levels, rounding toward zero) turns an AWGN link into a DMC
whose capacity under the input power budget never exceeds
``0.5 log2(1 + P/N)``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import ndtr

from .errors import InvalidArgument
from .info_core import NORMALIZATION_TOL, Pmf, as_sequence
from .rng import RngStream

ROW_TOL = NORMALIZATION_TOL


@dataclass(frozen=True, eq=False)
class Dmc:
    """Discrete memoryless channel ``p(y|x)``.

    ``input_cost`` optionally attaches a per-input-symbol cost (squared
    amplitude for discretized AWGN links); ``input_levels`` and
    ``output_levels`` keep the real values behind the symbol indices.
    """

    transitions: np.ndarray
    input_cost: np.ndarray | None = None
    input_levels: np.ndarray | None = None
    output_levels: np.ndarray | None = None
    row_tol: float = ROW_TOL

    def __post_init__(self) -> None:
        w = np.array(self.transitions, dtype=float)
        if w.ndim != 2 or w.size == 0:
            raise InvalidArgument("transition matrix must be a non-empty 2-D array")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InvalidArgument("transition probabilities must be finite and non-negative")
        bad = np.abs(w.sum(axis=1) - 1.0) > self.row_tol
        if np.any(bad):
            raise InvalidArgument(f"rows {np.flatnonzero(bad).tolist()} do not sum to 1")
        w.setflags(write=False)
        object.__setattr__(self, "transitions", w)
        for name in ("input_cost", "input_levels", "output_levels"):
            value = getattr(self, name)
            if value is not None:
                arr = np.array(value, dtype=float)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)
        if self.input_cost is not None and self.input_cost.shape != (w.shape[0],):
            raise InvalidArgument("input_cost needs one entry per input symbol")

    @property
    def input_size(self) -> int:
        return int(self.transitions.shape[0])

    @property
    def output_size(self) -> int:
        return int(self.transitions.shape[1])

    @cached_property
    def _cumulative(self) -> np.ndarray:
        cum = np.cumsum(self.transitions, axis=1)
        cum[:, -1] = np.inf
        return cum

    def output_marginal(self, p_x: Pmf | np.ndarray) -> Pmf:
        px = p_x.probs if isinstance(p_x, Pmf) else np.asarray(p_x, dtype=float)
        q = px @ self.transitions
        return Pmf(q / q.sum())

    def fingerprint(self) -> str:
        """Short stable hash of the transition matrix (for manifests)."""
        return hashlib.sha256(np.ascontiguousarray(self.transitions).tobytes()).hexdigest()[:16]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dmc):
            return NotImplemented
        return self.transitions.shape == other.transitions.shape and bool(
            np.all(self.transitions == other.transitions)
        )

    def __hash__(self) -> int:
        return hash(self.transitions.tobytes())

    def __repr__(self) -> str:
        return f"Dmc({self.input_size}x{self.output_size}, {self.fingerprint()})"


def bsc(crossover: float) -> Dmc:
    if not 0.0 <= crossover <= 1.0:
        raise InvalidArgument("crossover must lie in [0, 1]")
    p = float(crossover)
    return Dmc(np.array([[1 - p, p], [p, 1 - p]]))


def bec(erasure: float) -> Dmc:
    """Binary erasure channel; output symbol 2 is the erasure."""
    if not 0.0 <= erasure <= 1.0:
        raise InvalidArgument("erasure probability must lie in [0, 1]")
    e = float(erasure)
    return Dmc(np.array([[1 - e, 0.0, e], [0.0, 1 - e, e]]))


def identity_channel(k: int) -> Dmc:
    return Dmc(np.eye(k))


def symmetric_channel(k: int, error: float) -> Dmc:
    """k-ary symmetric channel: wrong symbols share ``error`` uniformly."""
    if k < 2:
        raise InvalidArgument("k-ary symmetric channel needs k >= 2")
    w = np.full((k, k), error / (k - 1))
    np.fill_diagonal(w, 1.0 - error)
    return Dmc(w)


def dmc_transmit(ch: Dmc, xn, rng: RngStream) -> np.ndarray:
    """Pass ``x^n`` through ``ch``; output is a pure function of the inputs."""
    x = as_sequence(xn, ch.input_size)
    if x.size == 0:
        return np.zeros(0, dtype=np.int64)
    u = rng.uniform(x.size)
    return transmit_with_uniforms(ch, x, u)


def transmit_with_uniforms(ch: Dmc, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF channel sampling given pre-drawn uniforms (same shape as x)."""
    cum = ch._cumulative[x]
    return (u[..., None] >= cum).sum(axis=-1).astype(np.int64)


# --------------------------------------------------------------------------
# Quantizer ladder


@dataclass(frozen=True)
class Quantizer:
    """Q[i]: levels ``{-i d, ..., 0, ..., i d}`` with ``d = 1/sqrt(i)``."""

    index: int

    def __post_init__(self) -> None:
        if int(self.index) < 1:
            raise InvalidArgument("quantizer index must be >= 1")

    @property
    def step(self) -> float:
        return 1.0 / math.sqrt(self.index)

    @property
    def levels(self) -> np.ndarray:
        return np.arange(-self.index, self.index + 1) * self.step

    @property
    def num_levels(self) -> int:
        return 2 * self.index + 1

    def level_index(self, x) -> np.ndarray:
        """Signed level number ``m`` in ``[-i, i]`` with ``[x]_i = m * step``."""
        xa = np.asarray(x, dtype=float)
        mag = np.abs(xa)
        m = np.floor(mag / self.step)
        # guard against the division rounding up past |x|
        m = np.where(m * self.step > mag, m - 1, m)
        m = np.minimum(m, self.index)
        return (np.sign(xa) * m).astype(np.int64)

    def __call__(self, x):
        m = self.level_index(x)
        out = m * self.step
        return float(out) if np.ndim(out) == 0 else out


def quantize(q: Quantizer | int, x):
    """Closest level of Q[i] to ``x`` with ``|[x]_i| <= |x|``; saturates at ``±sqrt(i)``."""
    quant = q if isinstance(q, Quantizer) else Quantizer(int(q))
    return quant(x)


# --------------------------------------------------------------------------
# AWGN


@dataclass(frozen=True)
class AwgnSpec:
    """Additive white Gaussian noise link with input power ``power`` and noise ``noise``."""

    power: float
    noise: float

    def __post_init__(self) -> None:
        if not (self.power > 0 and self.noise > 0):
            raise InvalidArgument("AWGN power and noise must both be positive")


def awgn_transmit(spec: AwgnSpec, x, rng: RngStream) -> np.ndarray:
    """``y = x + z`` with ``z`` i.i.d. N(0, noise), inverse-CDF sampled."""
    xv = np.asarray(x, dtype=float)
    return xv + math.sqrt(spec.noise) * rng.normal(xv.shape)


def awgn_capacity(spec: AwgnSpec) -> float:
    """``0.5 log2(1 + P/N)`` bits per channel use."""
    return 0.5 * math.log2(1.0 + spec.power / spec.noise)


def _gauss_interval_mass(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    # P(lo <= Z < hi) for standard Z; use the upper tail when both ends are positive
    upper = lo > 0
    a = np.where(upper, ndtr(-lo) - ndtr(-hi), ndtr(hi) - ndtr(lo))
    return np.maximum(a, 0.0)


def output_preimages(q: Quantizer) -> tuple[np.ndarray, np.ndarray]:
    """Preimage interval ``[lo, hi)`` of each level under the toward-zero rule.

    Positive level ``m d`` collects ``[m d, (m+1) d)``, negative level
    collects ``((m-1) d, m d]``, zero collects ``(-d, d)``, and the two
    extreme levels absorb the tails.  Boundary conventions do not matter
    for the Gaussian masses computed from them.
    """
    d = q.step
    m = np.arange(-q.index, q.index + 1, dtype=float)
    lo = np.where(m > 0, m * d, (m - 1) * d)
    hi = np.where(m < 0, m * d, (m + 1) * d)
    lo[q.index] = -d
    hi[q.index] = d
    lo[0] = -np.inf
    hi[-1] = np.inf
    return lo, hi


def discretize_awgn(spec: AwgnSpec, j: int, k: int) -> Dmc:
    """The DMC from input levels of Q[j] to ``[u + Z]_k`` for Z ~ N(0, noise).

    Entry ``(u, v)`` is the Gaussian mass of the Q[k] preimage of ``v``
    shifted by ``-u``.  The returned channel carries squared input levels
    as ``input_cost`` so capacity can be computed under the power budget.
    """
    qin, qout = Quantizer(j), Quantizer(k)
    u = qin.levels
    lo, hi = output_preimages(qout)
    sigma = math.sqrt(spec.noise)
    w = _gauss_interval_mass((lo[None, :] - u[:, None]) / sigma, (hi[None, :] - u[:, None]) / sigma)
    return Dmc(
        w,
        input_cost=u**2,
        input_levels=u,
        output_levels=qout.levels,
        row_tol=1e-9,
    )
