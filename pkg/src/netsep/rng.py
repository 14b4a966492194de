"""Deterministic, path-addressed random streams.

Every randomized construction in the toolkit draws from an ``RngStream``
identified by a master seed and a path such as ``(edge, layer, time,
trial)``.  The same (seed, path) pair always yields the same sequence, on
any platform: the path is folded into a ``numpy.random.SeedSequence``
spawn key and fed to PCG64.  String path components are mapped to
integers through SHA-256 so that names like ``"channel_code"`` can be used
as path elements.

Gaussian variates use inverse-CDF sampling (``scipy.special.ndtri``) on
53-bit uniforms shifted into the open interval (0, 1), so they do not
depend on numpy's ziggurat implementation.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import ndtri

PathItem = Union[int, str]

_MASK64 = (1 << 64) - 1


def _path_word(item: PathItem) -> int:
    if isinstance(item, (bool, np.bool_)):
        raise TypeError("boolean path components are ambiguous")
    if isinstance(item, (int, np.integer)):
        value = int(item)
        if value < 0:
            # keep negatives distinct from their two's-complement twins
            return int.from_bytes(hashlib.sha256(f"neg:{value}".encode()).digest()[:8], "big")
        if value > _MASK64:
            raise ValueError(f"path component {value} exceeds 64 bits")
        return value
    if isinstance(item, str):
        digest = hashlib.sha256(f"str:{item}".encode()).digest()
        return int.from_bytes(digest[:8], "big")
    raise TypeError(f"unsupported path component {item!r}")


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream at ``path`` under ``master_seed``."""

    master_seed: int
    path: tuple[PathItem, ...] = ()

    def __post_init__(self) -> None:
        if not 0 <= int(self.master_seed) <= _MASK64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "master_seed", int(self.master_seed))
        object.__setattr__(self, "path", tuple(self.path))

    def child(self, *items: PathItem) -> "RngStream":
        """Stream at ``path + items`` (independent of this stream's draws)."""
        return RngStream(self.master_seed, self.path + tuple(items))

    def generator(self) -> np.random.Generator:
        """A new generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=tuple(_path_word(p) for p in self.path)
        )
        return np.random.Generator(np.random.PCG64(seq))

    # The helpers below always start from the stream origin, so an
    # RngStream behaves as a value: same stream, same draws.

    def uniform(self, size: int | tuple[int, ...]) -> np.ndarray:
        """Uniforms in the open interval (0, 1)."""
        return open_uniform(self.generator(), size)

    def normal(self, size: int | tuple[int, ...]) -> np.ndarray:
        return ndtri(self.uniform(size))

    def integers(self, low: int, high: int, size=None) -> np.ndarray:
        return self.generator().integers(low, high, size=size)


def open_uniform(gen: np.random.Generator, size) -> np.ndarray:
    # random() gives k / 2**53 with k in [0, 2**53); shift by half a step
    return gen.random(size) + 2.0**-54


def derive_seed(master_seed: int, *path: PathItem) -> int:
    """A 64-bit integer seed derived from ``(master_seed, path)``."""
    return int(RngStream(master_seed, path).generator().integers(0, 2**63, dtype=np.int64))
