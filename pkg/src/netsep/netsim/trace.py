"""Columnar transcript export."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .engine import RunResult

TRACE_COLUMNS = ("trial", "edge", "layer", "time", "x", "y")


def trace_rows(run: RunResult, trials: int | None = None):
    """Yield ``(trial, edge, layer, time, x, y)`` rows; times are 1-based.

    Pipe edges appear with layer 0 and one row per bit, ``time`` being the
    bit position.
    """
    T = run.trials if trials is None else min(trials, run.trials)
    for e in run.net.edges:
        if e.is_pipe:
            sent, got = run.pipe_sent[e.id], run.pipe_received[e.id]
            for i in range(T):
                for b in range(sent.shape[1]):
                    yield (i, e.id, 0, b + 1, int(sent[i, b]), int(got[i, b]))
            continue
        x, y = run.inputs[e.id], run.outputs[e.id]
        fmt = _fmt_real if np.issubdtype(x.dtype, np.floating) else int
        for i in range(T):
            for layer in range(run.layers):
                for t in range(run.n):
                    yield (i, e.id, layer, t + 1, fmt(x[i, layer, t]), fmt(y[i, layer, t]))


def _fmt_real(v) -> str:
    return repr(float(v))


def write_trace(run: RunResult, path: str | Path, trials: int | None = None) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        w.writerows(trace_rows(run, trials))
    return p
