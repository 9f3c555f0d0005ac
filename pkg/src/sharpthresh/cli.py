"""Command-line front end.

Every subcommand writes a CSV (or JSON) table to ``--out`` or stdout and,
when ``--out`` is given, a ``<out>.meta.json`` sidecar recording the
arguments, seed and package version.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .continuous import counterexample_rows
from .encoding import MonotoneEncoder, check_threshold_tree, verify_monotone_map, verify_pushforward
from .influence import influence_report, majority_event, mixture_influences
from .lattice import Event
from .measure import PositiveMeasure, check_fkg_lattice
from .random_cluster import (FiniteGraph, RCParameters, complete_graph, cycle_graph, edge_marginal_bounds,
                             exact_rc_measure, grid_graph, path_graph, rc_weights, sample_rc,
                             self_dual_point, triangle, write_samples)
from .torus import MCMCConfig, TorusLattice, estimate_crossing, estimate_pk


def parse_number(text: str):
    """Rational strings ('1/2', '2') stay exact; anything with a decimal point becomes float."""
    if any(c in text for c in ".eE") and "/" not in text:
        return float(text)
    return Fraction(text)


def load_graph(source: str) -> FiniteGraph:
    """A path to an edge-list file or one of triangle, cycle:N, path:N, complete:N, grid:WxH, torus:L."""
    name, _, arg = source.partition(":")
    if name == "triangle":
        return triangle()
    if name == "cycle":
        return cycle_graph(int(arg))
    if name == "path":
        return path_graph(int(arg))
    if name == "complete":
        return complete_graph(int(arg))
    if name == "grid":
        w, h = arg.lower().split("x")
        return grid_graph(int(w), int(h))
    if name == "torus":
        return TorusLattice(int(arg)).graph()
    path = Path(source)
    if not path.exists():
        raise SystemExit(f"unknown graph {source!r}")
    return FiniteGraph.from_edge_list(path.read_text(), multigraph=True)


def _fmt(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def emit(rows: list[dict], meta: dict, args) -> None:
    rows = [{k: _fmt(v) for k, v in r.items()} for r in rows]
    if args.format == "json":
        text = json.dumps(rows, indent=1) + "\n"
    else:
        buf = io.StringIO()
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        text = buf.getvalue()
    meta = {"command": args.command, "version": __version__,
            "arguments": {k: _fmt(v) if not isinstance(v, Fraction) else str(v)
                          for k, v in vars(args).items() if k not in ("func",)},
            **meta}
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        out.with_name(out.name + ".meta.json").write_text(json.dumps(meta, indent=1, default=str))
    else:
        sys.stdout.write(text)


def _mcmc(args) -> MCMCConfig:
    return MCMCConfig(sweeps=args.sweeps, burn_in=args.burn_in, seed=args.seed,
                      batches=args.batches)


# ------------------------------------------------------------------ commands

def cmd_rc_exact(args):
    g = load_graph(args.graph)
    params = RCParameters(args.p, args.q)
    mu = exact_rc_measure(g, params)
    lo, hi = edge_marginal_bounds(params)
    rows = []
    for e, (u, v) in enumerate(g.edges):
        rows.append({"edge": e, "u": u, "v": v, "marginal": mu.marginal(e),
                     "lower_bound": lo, "upper_bound": hi})
    emit(rows, {"exact": mu.exact, "fkg": check_fkg_lattice(mu), "graph": g.digest()}, args)


def cmd_rc_sample(args):
    g = load_graph(args.graph)
    params = RCParameters(args.p, args.q)
    t0 = time.perf_counter()
    samples = np.array(list(sample_rc(g, params, args.sweeps, args.burn_in, args.seed, args.thin)))
    elapsed = time.perf_counter() - t0
    if args.samples_out:
        write_samples(args.samples_out, samples, g, params, args.seed, args.sweeps, args.burn_in,
                      args.thin)
    means = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / math.sqrt(len(samples)) if len(samples) > 1 else means * 0
    rows = [{"edge": e, "empirical_marginal": float(means[e]), "naive_stderr": float(se[e])}
            for e in range(g.edge_count)]
    emit(rows, {"graph": g.digest(), "samples": len(samples), "seconds": elapsed}, args)


def _load_measure(args) -> PositiveMeasure:
    if args.measure:
        return PositiveMeasure.from_json(Path(args.measure).read_text())
    g = load_graph(args.graph)
    return rc_weights(g, args.p, args.q)


def cmd_influence(args):
    if args.mixture:
        N = args.mixture
        cond, absl = mixture_influences(N)
        rows = [{"coordinate": 1, "conditional_influence": float(cond),
                 "absolute_influence": float(absl)}]
        emit(rows, {"mixture_N": N, "event": "majority"}, args)
        return
    mu = _load_measure(args)
    if args.event:
        A = Event.from_json(Path(args.event).read_text())
    else:
        A = majority_event(mu.n) if mu.n % 2 else Event.coordinate(mu.n, 0)
    rep = influence_report(mu, A)
    if args.format == "json":
        args_rows = [rep.to_dict()]
    else:
        args_rows = [{"coordinate": i + 1, "conditional_influence": float(c),
                      "absolute_influence": float(a)}
                     for i, (c, a) in enumerate(zip(rep.conditional, rep.absolute))]
    emit(args_rows, {"probability": float(rep.probability), "ratio": rep.ratio}, args)


def cmd_encode_verify(args):
    mu = _load_measure(args)
    enc = MonotoneEncoder(mu)
    stat = verify_pushforward(enc, args.samples, args.seed)
    mono = verify_monotone_map(enc, args.pairs, args.seed + 1)
    if args.cells:
        Path(args.cells).write_text(enc.cells_to_json())
    rows = [{"n": mu.n, "exact_match": stat.exact_match, "max_volume_error": stat.max_volume_error,
             "samples": stat.samples, "tv_distance": stat.tv_distance,
             "chi_square": stat.chi_square, "dof": stat.dof,
             "threshold_tree_monotone": check_threshold_tree(enc), "monotone_map": mono}]
    emit(rows, {"exact": mu.exact}, args)


def _p_default(args) -> float:
    return args.p if args.p is not None else self_dual_point(args.q)


def cmd_torus_crossing(args):
    t = TorusLattice(args.k * args.n)
    params = RCParameters(_p_default(args), args.q)
    est = estimate_crossing(t, params, args.event, _mcmc(args), n=args.n, alpha=args.alpha, k=args.k)
    emit([est.to_dict()], {"torus_side": t.n}, args)


def cmd_threshold_curve(args):
    t = TorusLattice(args.k * args.n)
    rows = []
    for i, p in enumerate(np.linspace(args.p_min, args.p_max, args.points)):
        cfg = MCMCConfig(sweeps=args.sweeps, burn_in=args.burn_in, seed=args.seed + i,
                         batches=args.batches)
        est = estimate_crossing(t, RCParameters(float(p), args.q), args.event, cfg, n=args.n,
                                alpha=args.alpha, k=args.k)
        rows.append({"p": float(p), "estimate": est.estimate, "std_error": est.std_error,
                     "samples": est.samples})
    emit(rows, {"torus_side": t.n, "event": args.event}, args)


def cmd_pk_scan(args):
    rows = []
    ps = [float(x) for x in args.p_grid.split(",")] if args.p_grid else [self_dual_point(args.q)]
    for k in range(1, args.k + 1):
        for j, p in enumerate(ps):
            cfg = MCMCConfig(sweeps=args.sweeps, burn_in=args.burn_in, seed=args.seed + 1000 * k + j,
                             batches=args.batches)
            est = estimate_pk(k, RCParameters(p, args.q), cfg)
            rows.append({"k": k, "p": p, "torus_side": est.torus, "estimate": est.estimate,
                         "std_error": est.std_error})
    emit(rows, {"note": "torus proxy for the infinite-volume wired measure"}, args)


def cmd_counterexample(args):
    Ns = [int(x) for x in args.N.split(",")]
    ps = [float(x) for x in args.p_grid.split(",")]
    emit(counterexample_rows(Ns, ps, args.samples, args.seed), {}, args)


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sharpthresh",
                                 description="Influences, monotone encodings and random-cluster crossings.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, mcmc=False):
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="output file; a .meta.json sidecar is written next to it")
        p.add_argument("--seed", type=int, default=0)
        if mcmc:
            p.add_argument("--sweeps", type=int, default=10_000)
            p.add_argument("--burn-in", type=int, default=1_000)
            p.add_argument("--batches", type=int, default=20)

    p = sub.add_parser("rc-exact", help="exact random-cluster edge marginals by enumeration")
    p.add_argument("--graph", default="triangle")
    p.add_argument("--p", type=parse_number, default=Fraction(1, 2))
    p.add_argument("--q", type=parse_number, default=Fraction(2))
    common(p)
    p.set_defaults(func=cmd_rc_exact)

    p = sub.add_parser("rc-sample", help="heat-bath samples of the random-cluster measure")
    p.add_argument("--graph", default="triangle")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--samples-out", help="bit-packed sample file (with JSON sidecar)")
    common(p, mcmc=True)
    p.set_defaults(func=cmd_rc_sample)

    for name, func, helptext in (("influence", cmd_influence, "conditional and absolute influences"),
                                 ("encode-verify", cmd_encode_verify, "verify the monotone encoding")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--measure", help="measure JSON {n, weights}")
        p.add_argument("--graph", default="triangle", help="random-cluster measure on this graph")
        p.add_argument("--p", type=parse_number, default=Fraction(1, 2))
        p.add_argument("--q", type=parse_number, default=Fraction(2))
        common(p)
        p.set_defaults(func=func)
        if name == "influence":
            p.add_argument("--event", help="event JSON: array of bit strings")
            p.add_argument("--mixture", type=int, help="odd N: Bernoulli mixture with majority event")
        else:
            p.add_argument("--samples", type=int, default=100_000)
            p.add_argument("--pairs", type=int, default=10_000)
            p.add_argument("--cells", help="write the cell decomposition as JSON")

    helps = {"torus-crossing": "crossing probability on the torus of side k*n",
             "threshold-curve": "crossing probability against p on the torus of side k*n"}
    for name, func in (("torus-crossing", cmd_torus_crossing), ("threshold-curve", cmd_threshold_curve)):
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--n", type=int, default=4)
        p.add_argument("--k", type=int, default=2)
        p.add_argument("--q", type=float, default=2.0)
        p.add_argument("--alpha", type=float, default=1.5)
        p.add_argument("--event", choices=("LW", "SW", "A"), default="LW" if name == "torus-crossing" else "A")
        common(p, mcmc=True)
        p.set_defaults(func=func)
        if name == "torus-crossing":
            p.add_argument("--p", type=float, default=None, help="defaults to the self-dual point")
        else:
            p.add_argument("--p-min", type=float, default=0.3)
            p.add_argument("--p-max", type=float, default=0.7)
            p.add_argument("--points", type=int, default=9)

    p = sub.add_parser("pk-scan", help="finite-volume crossing proxy p_k for k = 1..K")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--p-grid", help="comma-separated p values (default: self-dual point)")
    common(p, mcmc=True)
    p.set_defaults(func=cmd_pk_scan)

    p = sub.add_parser("counterexample", help="closed form vs Monte Carlo for the no-sharp-threshold family")
    p.add_argument("--N", default="4,16,64")
    p.add_argument("--p-grid", default="0.3,0.5,0.7")
    p.add_argument("--samples", type=int, default=100_000)
    common(p)
    p.set_defaults(func=cmd_counterexample)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
