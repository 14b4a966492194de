"""netsep command line: run a manifest, write CSV tables and a JSON summary.

Exit codes: 0 on success, 2 on validation errors (bad arguments, invalid
manifests, infeasible plans), 3 when a numerical solver fails to converge.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from ..channels import AwgnSpec, awgn_capacity, discretize_awgn
from ..codecs.emulation import emulation_joint
from ..coding_theorems import DistortionMeasure, ba_capacity, ba_rate_distortion, separation_frontier
from ..errors import ConvergenceFailure, InvalidArgument, NetsepError
from ..info_core import Pmf, mutual_information
from ..netsim import (
    AwgnLink,
    BitPipe,
    NetworkSpec,
    edge_capacity,
    fold_unraveled,
    network_from_config,
    run_network,
    runs_identical,
    stack,
    unravel,
    write_trace,
)
from ..netsim.config import NetworkCfg, channel_from_config, load_network
from ..rng import RngStream
from .manifest import (
    AwgnSweepManifest,
    CapacityManifest,
    EmulateManifest,
    PatchManifest,
    RdManifest,
    SeparateManifest,
    StackCheckManifest,
    load_manifest,
)
from .patch import plan_lossless_patch, run_lossless_patch
from .probes import run_awgn_sweep, run_emulation_probe
from .scenarios import rd_pipe_scheme, repetition_codes, slepian_wolf_scheme, uncoded_codes
from .separation import SeparationPlan, link_dmc, run_separated

OUTPUT_ENV = "NETSEP_OUTPUT_DIR"
DEFAULT_OUTPUT = "netsep-out"
EXIT_OK, EXIT_INVALID, EXIT_CONVERGENCE = 0, 2, 3

log = logging.getLogger("netsep")


class Outcome:
    """Tables, summary and console lines produced by one scenario."""

    def __init__(self):
        self.tables: dict[str, list[dict]] = {}
        self.summary: dict = {}
        self.lines: list[str] = []


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _spread(values: np.ndarray) -> dict:
    """Mean, median and a normal-approximation 95% interval for the mean."""
    v = np.asarray(values, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    m = float(v.mean())
    return {"mean": m, "median": float(np.median(v)), "ci95_low": m - 1.96 * se, "ci95_high": m + 1.96 * se}


def _network(ref) -> NetworkSpec:
    return network_from_config(ref) if isinstance(ref, NetworkCfg) else load_network(ref)


# --------------------------------------------------------------------------
# Scenario runners


def _capacity(m: CapacityManifest, out: Outcome) -> None:
    ch = channel_from_config(m.channel)
    if isinstance(ch, BitPipe):
        cap, law, gap, iters = ch.capacity, np.ones(1), 0.0, 0
    elif isinstance(ch, AwgnLink) and (ch.j is None or ch.k is None):
        cap, law, gap, iters = awgn_capacity(ch.spec), np.ones(1), 0.0, 0
    else:
        dmc = ch if not isinstance(ch, AwgnLink) else discretize_awgn(ch.spec, ch.j, ch.k)
        budget = m.power_budget
        if isinstance(ch, AwgnLink) and budget is None:
            budget = ch.spec.power
        res = ba_capacity(dmc, tol=m.tol, power_budget=budget)
        cap, law, gap, iters = res.capacity, res.optimal_input.probs, res.gap, res.iterations
    out.tables["optimal_input"] = [{"input": i, "probability": float(p)} for i, p in enumerate(law)]
    out.summary = {"capacity": cap, "gap": gap, "iterations": iters}
    out.lines.append(f"capacity = {cap:.6f} bits/use (gap {gap:.1e})")


def _measure(spec, size: int) -> DistortionMeasure:
    if spec == "hamming":
        return DistortionMeasure.hamming(size)
    return DistortionMeasure(np.array(spec.table), faithful=spec.faithful)


def _rd(m: RdManifest, out: Outcome) -> None:
    src = Pmf(np.array(m.source))
    d = _measure(m.measure, src.alphabet_size)
    rows = []
    for target in m.distortions:
        r = ba_rate_distortion(src, d, target, tol=m.tol)
        rows.append({"D": target, "rate": r.rate, "distortion_achieved": r.distortion_achieved,
                     "lower_bound": r.lower_bound})
        out.lines.append(f"R({target:g}) = {r.rate:.6f} bits/letter")
    out.tables["rd_curve"] = rows
    out.summary = {"points": len(rows)}


def _emulate(m: EmulateManifest, out: Outcome) -> None:
    ch = channel_from_config(m.channel)
    if isinstance(ch, (AwgnLink, BitPipe)):
        ch = _discrete(ch)
    p_x = np.array(m.input) if m.input is not None else np.full(ch.input_size, 1.0 / ch.input_size)
    info = mutual_information(emulation_joint(ch, p_x))
    rates = m.rates if m.rates is not None else [info + o for o in m.rate_offsets]
    rows = run_emulation_probe(ch, p_x, rates, m.blocklengths, m.trials, RngStream(m.seed, ("emulate",)),
                               m.epsilon, m.mode)
    out.tables["fidelity"] = rows
    out.summary = {"mutual_information": info, "cells": len(rows)}
    for r in rows:
        out.lines.append(f"R={r['rate']:.4f} (margin {r['margin']:+.3f}) N={r['N']}: median TV {r['median_tv']:.4f}")


def _discrete(ch):
    if isinstance(ch, AwgnLink) and ch.j is not None and ch.k is not None:
        return discretize_awgn(ch.spec, ch.j, ch.k)
    raise InvalidArgument("emulation needs a discrete channel")


def _separate(m: SeparateManifest, out: Outcome) -> None:
    net = _network(m.network)
    plan = SeparationPlan(layers=m.layers, n=m.n, L=m.L, rates=m.rates, repeats=m.repeats)
    caps = {e.id: edge_capacity(e.channel if e.is_pipe else link_dmc(e)) for e in net.edges}
    layers = plan.pipe_layers
    if m.scheme == "rate_distortion":
        if len(net.edges) != 1 or len(net.demands) != 1:
            raise InvalidArgument("the rate-distortion scheme needs a single edge and a single demand")
        e, d = net.edges[0], net.demands[0]
        budget = math.floor(layers * m.n * caps[e.id] + 1e-9)
        bits = budget if m.rd_bits is None else m.rd_bits
        scheme = rd_pipe_scheme(net.source.marginal(d.source), d.measure, bits, layers * m.L, m.seed)
        scheme.edge, scheme.source_node, scheme.sink = e.id, d.source, d.sink
    else:
        ids = {e.id for e in net.edges}
        if ids != {"e1", "e2"} or set(net.nodes) != {"1", "2", "3"}:
            raise InvalidArgument("the Slepian-Wolf scheme needs nodes 1, 2, 3 and edges e1, e2")
        scheme = slepian_wolf_scheme(net.source.pair("1", "2"), {"1": caps["e1"], "2": caps["e2"]},
                                     m.n, m.L, layers, m.seed)
    rep = run_separated(net, scheme.codes(), plan, m.trials, RngStream(m.seed, ("separate",)),
                        mc_trials=m.mc_trials, schedule=m.schedule)
    summary = rep.summary()
    if m.scheme == "rate_distortion":
        d = net.demands[0]
        kappa = m.L / m.n
        opta = separation_frontier(Pmf(net.source.marginal(d.source)), d.measure, caps[net.edges[0].id], kappa)
        summary["opta_distortion"] = opta
    for p in rep.pairs():
        summary["pairs"][f"{p[0]}->{p[1]}"]["per_trial"] = _spread(rep.realized.per_trial(p))
    rows = []
    T = rep.realized.trials
    link_any = np.zeros(T, dtype=bool)
    for v in rep.link_errors.values():
        if v.size:
            link_any |= v.any(axis=1)
    for p in rep.pairs():
        real = rep.realized.per_trial(p)
        base = rep.baseline.per_trial(p)
        blk = rep.realized.block_errors(p)
        for i in range(T):
            rows.append({"scenario": m.name or m.scenario, "seed": m.seed, "trial": i, "pair": f"{p[0]}->{p[1]}",
                         "distortion": float(real[i]), "pipe_distortion": float(base[i]),
                         "block_error": int(blk[i]), "link_error": int(link_any[i])})
    out.tables["trials"] = rows
    out.summary = summary
    for key, v in summary["pairs"].items():
        out.lines.append(f"{key}: distortion {v['distortion']:.4f}, bound {v['union_bound']:.4f}, "
                         f"block error {v['block_error_rate']:.3f}")


def _patch(m: PatchManifest, out: Outcome) -> None:
    net = _network(m.network)
    base = uncoded_codes(net)
    plan = plan_lossless_patch(
        net, base, tuple(m.pair), m.L, m.n, m.sessions, RngStream(m.seed, ("patch", "plan")),
        calibration_trials=m.calibration_trials, delta=m.delta, margin_bits=m.margin_bits,
        candidates=m.candidates, extra_sessions=m.extra_sessions,
    )
    rep = run_lossless_patch(net, base, plan, m.trials, RngStream(m.seed, ("patch", "run")))
    out.summary = rep.summary()
    out.tables["trials"] = [
        {"trial": i, "block_error": int(rep.block_errors[i]), "base_block_error": int(rep.base_block_errors[i]),
         "inner_error": int(rep.inner_errors[i]), "sw_failure": int(rep.sw_failures[i])}
        for i in range(rep.block_errors.size)
    ]
    s = out.summary
    out.lines.append(f"block error {s['block_error_rate']:.3f}, N'/N = {s['overhead']:.3f}, "
                     f"R0/C0 = {s['r0_over_c0']:.3f}, kappa' = {s['kappa_prime']}")


def _awgn(m: AwgnSweepManifest, out: Outcome) -> None:
    spec = AwgnSpec(m.power, m.noise)
    cells = run_awgn_sweep(spec, m.cells(), tol=m.tol)
    out.tables["capacity"] = [c.row() for c in cells]
    out.summary = {"ceiling": awgn_capacity(spec), "cells": len(cells),
                   "best": max(c.capacity for c in cells)}
    for c in cells:
        out.lines.append(f"(j={c.j}, k={c.k}): {c.capacity:.6f} (ceiling {c.ceiling:.6f})")


def _stack_check(m: StackCheckManifest, out: Outcome) -> None:
    net = _network(m.network)
    codes = repetition_codes(net, m.L)
    rng = RngStream(m.seed, ("stack-check",))
    stacked = stack(net, m.layers).run(codes, n=m.n, L=m.L, rng=rng, trials=m.trials, schedule=m.schedule)
    plan = unravel(codes, m.layers, m.n, m.L)
    flat = run_network(net, plan.codes, n=plan.n, L=plan.L, rng=rng, trials=m.trials, schedule=m.schedule)
    same = runs_identical(stacked, fold_unraveled(flat, m.layers))
    same_matrix = stacked.distortion_matrix().entries == flat.distortion_matrix().entries
    verdict = "EXACT-MATCH" if same and same_matrix else "MISMATCH"
    dm_s, dm_u = stacked.distortion_matrix(), flat.distortion_matrix()
    out.tables["distortion"] = [
        {"pair": f"{a}->{b}", "stacked": dm_s[(a, b)], "unraveled": dm_u[(a, b)]} for a, b in dm_s.pairs()
    ]
    out.summary = {"verdict": verdict, "layers": m.layers, "n": m.n, "L": m.L,
                   "unraveled_n": plan.n, "unraveled_L": plan.L, "kappa": m.L / m.n,
                   "unraveled_kappa": plan.kappa}
    out.extra_trace = (stacked, m.trace_trials)
    out.lines.append(verdict)


RUNNERS: dict[str, tuple[type, Callable]] = {
    "capacity": (CapacityManifest, _capacity),
    "rd": (RdManifest, _rd),
    "emulate": (EmulateManifest, _emulate),
    "separate": (SeparateManifest, _separate),
    "patch": (PatchManifest, _patch),
    "awgn-sweep": (AwgnSweepManifest, _awgn),
    "stack-check": (StackCheckManifest, _stack_check),
}


# --------------------------------------------------------------------------
# Output


def write_csv(path: Path, rows: list[dict]) -> None:
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})


def write_outputs(directory: Path, manifest, out: Outcome) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, rows in sorted(out.tables.items()):
        p = directory / f"{name}.csv"
        write_csv(p, rows)
        written.append(p)
    trace = getattr(out, "extra_trace", None)
    if trace is not None and trace[1] > 0:
        written.append(write_trace(trace[0], directory / "trace.csv", trials=trace[1]))
    summary = {"scenario": manifest.scenario, "manifest": manifest.model_dump(mode="json"),
               "result": _jsonable(out.summary)}
    p = directory / "summary.json"
    p.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    written.append(p)
    return written


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="netsep", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "capacity": "channel capacity and optimal input",
        "rd": "rate-distortion curve",
        "emulate": "channel emulation fidelity table",
        "separate": "separated source-network and channel coding pipeline",
        "patch": "zero-distortion to lossless patch pipeline",
        "awgn-sweep": "capacities of quantized AWGN links",
        "stack-check": "stacked versus unraveled run equivalence",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("manifest", type=Path, help="YAML or JSON manifest")
        sp.add_argument("-o", "--out", type=Path, default=None,
                        help=f"output directory (default: ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        manifest = load_manifest(args.manifest)
        if manifest.scenario != args.command:
            print(f"error: manifest is for '{manifest.scenario}', not '{args.command}'", file=sys.stderr)
            return EXIT_INVALID
        _, runner = RUNNERS[args.command]
        out = Outcome()
        log.info("running %s", args.command)
        runner(manifest, out)
        root = args.out or Path(os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)
        directory = root / (manifest.name or manifest.scenario)
        written = write_outputs(directory, manifest, out)
    except ConvergenceFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (NetsepError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    for line in out.lines:
        print(line)
    for p in written:
        log.info("wrote %s", p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
