"""Table-producing experiments: emulation fidelity grids and AWGN discretization sweeps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..channels import AwgnSpec, Dmc, awgn_capacity, discretize_awgn
from ..codecs import emulation_fidelity
from ..codecs.emulation import DEFAULT_EPSILON, emulation_joint
from ..coding_theorems import ba_capacity
from ..errors import InvalidArgument
from ..info_core import Pmf, mutual_information
from ..rng import RngStream


def run_emulation_probe(
    ch: Dmc,
    p_x: Pmf | np.ndarray,
    rates: Sequence[float],
    blocklengths: Sequence[int],
    trials: int,
    rng: RngStream,
    epsilon: float = DEFAULT_EPSILON,
    mode: str = "auto",
) -> list[dict]:
    """Fidelity statistics for every ``(R, N)`` cell, tagged with ``R - I(X;Y)``.

    Cell ``(i, j)`` draws from ``rng.child("cell", i, j)``, so adding grid
    points never changes existing cells.
    """
    if not rates or not blocklengths:
        raise InvalidArgument("rate and blocklength grids must be non-empty")
    info = mutual_information(emulation_joint(ch, p_x))
    rows = []
    for i, r in enumerate(rates):
        for j, n in enumerate(blocklengths):
            stats = emulation_fidelity(ch, p_x, float(r), int(n), epsilon, trials, rng.child("cell", i, j), mode)
            row = stats.row()
            row["mutual_information"] = info
            rows.append(row)
    return rows


@dataclass(frozen=True)
class SweepCell:
    j: int
    k: int
    capacity: float
    ceiling: float
    gap: float
    iterations: int

    def row(self) -> dict:
        return {
            "j": self.j,
            "k": self.k,
            "capacity": self.capacity,
            "ceiling": self.ceiling,
            "shortfall": self.ceiling - self.capacity,
            "certificate_gap": self.gap,
            "iterations": self.iterations,
        }


def run_awgn_sweep(spec: AwgnSpec, grid: Sequence[tuple[int, int]], tol: float = 1e-9) -> list[SweepCell]:
    """Power-constrained capacity of each quantized AWGN link, with the Gaussian ceiling attached."""
    if not grid:
        raise InvalidArgument("the (j, k) grid must be non-empty")
    ceiling = awgn_capacity(spec)
    out = []
    for j, k in grid:
        ch = discretize_awgn(spec, int(j), int(k))
        res = ba_capacity(ch, power_budget=spec.power, tol=tol)
        out.append(SweepCell(int(j), int(k), res.capacity, ceiling, res.gap, res.iterations))
    return out
