"""Command-line front end: single simulation runs and figure-grade sweeps.

A single run writes one CSV row per round (or the same rows wrapped in JSON
with the config echoed back). A preset expands into a whole sweep — several
graph sizes times several healers times `--reps` seeds — and writes one
aggregated row per (size, healer) pair: the mean of that preset's headline
statistic and its sample standard deviation. Infinite values print as the
literal `inf`.

Exit codes: 0 success, 1 usage or input error, 2 invariant violation during a
run (the violating round goes to stderr; partial output is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import statistics
import sys

from .adversary import ATTACKS
from .harness import COLUMNS, HEALERS, BadParams, SimConfig, run

LABEL_ALGOS = ("binheal", "dash", "graphheal", "line", "sdash")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; the contract here reserves 2 for
    invariant violations, so usage problems become exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def build_parser():
    p = _Parser(prog="selfheal",
                description="Simulate healing algorithms against node-deletion "
                            "adversaries and record the damage metrics.")
    p.add_argument("--algo", default="dash", choices=sorted(HEALERS),
                   help="healing algorithm")
    p.add_argument("--attack", default="random", metavar="POLICY",
                   help=f"one of {', '.join(sorted(ATTACKS))}, or script=FILE")
    p.add_argument("--topology", default="pa", metavar="SHAPE",
                   help="pa, star, tree, path, or file=PATH")
    p.add_argument("--n", type=int, default=100, help="initial node count")
    p.add_argument("--m", type=int, default=2,
                   help="edges per arrival for the pa topology")
    p.add_argument("--k", type=int, default=4, help="tree branch factor")
    p.add_argument("--depth", type=int, default=3, help="tree depth")
    p.add_argument("--rounds", type=int, default=None,
                   help="round cap (default: run until the attack stops)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=30,
                   help="seeds per configuration in a preset sweep")
    p.add_argument("--checks", default="fast", choices=("all", "fast", "off"),
                   help="invariant checking level")
    p.add_argument("--metrics", default="full", choices=("full", "degree"),
                   help="'degree' skips the all-pairs diameter/stretch columns")
    p.add_argument("--out", default="-", metavar="PATH",
                   help="output file ('-' for stdout)")
    p.add_argument("--format", default="csv", choices=("csv", "json"))
    p.add_argument("--preset", default=None, metavar="NAME",
                   help=f"run a sweep: {', '.join(sorted(PRESETS))}")
    p.add_argument("--spanning-tree", action="store_true",
                   help="let the tree healer project a BFS tree out of a dense graph")
    p.add_argument("--random-real-ids", action="store_true",
                   help="draw node ids uniformly from [0,1) instead of integers")
    return p


def config_from_args(args) -> SimConfig:
    attack, _, script_file = args.attack.partition("=")
    topology, _, graph_file = args.topology.partition("=")
    return SimConfig(healer=args.algo, attack=attack, topology=topology,
                     n0=args.n, m=args.m, k=args.k, depth=args.depth,
                     graph_file=graph_file, script_file=script_file,
                     rounds=args.rounds, seed=args.seed, checks=args.checks,
                     metrics=args.metrics, spanning_tree=args.spanning_tree,
                     random_real_ids=args.random_real_ids)


# -- serialization ---------------------------------------------------------------

def rows_to_csv(rows, extra=()):
    """Per-round rows in the stable column order; `extra` prepends constant
    (name, value) columns, which the sweep output uses to tag the algorithm."""
    names = [name for name, _ in extra]
    values = [value for _, value in extra]
    out = io.StringIO()
    w = csv.writer(out)
    w.writerow(names + list(COLUMNS))
    for r in rows:
        w.writerow(values + [getattr(r, c) for c in COLUMNS])
    return out.getvalue()


def trace_to_json(trace):
    return json.dumps(trace.to_obj(), indent=2) + "\n"


def write_out(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# -- single runs -------------------------------------------------------------------

def run_single(args):
    cfg = config_from_args(args)
    trace = run(cfg)
    if args.format == "csv":
        write_out(args.out, rows_to_csv(trace.rows))
    else:
        write_out(args.out, trace_to_json(trace))
    if trace.violation:
        print(f"invariant violation at {trace.violation}", file=sys.stderr)
        return 2
    return 0


# -- preset sweeps -------------------------------------------------------------------

PRESETS = {
    # column name, sizes, metrics level, statistic taken over one run's rows
    "degree-vs-n": ("mean_max_delta", (50, 100, 200), "degree",
                    lambda rows: max((r.max_delta_add for r in rows), default=0)),
    "messages-vs-n": ("mean_msgs_total", (50, 100, 200), "degree",
                      lambda rows: sum(r.msgs_total for r in rows)),
    "idchanges-vs-n": ("mean_id_changes", (50, 100, 200), "degree",
                       lambda rows: max((r.id_changes_max for r in rows), default=0)),
    "stretch-vs-n": ("mean_stretch", (16, 32, 64), "full",
                     lambda rows: max((r.stretch for r in rows), default=1.0)),
    "timeline": None,                       # per-round rows, one run per healer
}


def run_preset(args):
    if args.preset not in PRESETS:
        raise BadParams(f"unknown preset {args.preset!r} (have {sorted(PRESETS)})")
    if args.preset == "timeline":
        return run_timeline(args)
    column, sizes, metrics, stat = PRESETS[args.preset]
    aggregated = []
    violations = []
    for n in sizes:
        for algo in LABEL_ALGOS:
            samples = []
            for rep in range(args.reps):
                cfg = SimConfig(healer=algo, attack="nmax", topology="pa",
                                n0=n, m=args.m, seed=args.seed + rep,
                                checks=args.checks, metrics=metrics)
                tr = run(cfg)
                if tr.violation:
                    violations.append(f"n={n} algo={algo} seed={cfg.seed}: {tr.violation}")
                samples.append(stat(tr.rows))
            mean = statistics.fmean(samples)
            std = statistics.stdev(samples) if len(samples) > 1 else 0.0
            aggregated.append((n, algo, mean, std))
    if args.format == "csv":
        out = io.StringIO()
        w = csv.writer(out)
        w.writerow(["n", "algo", column, "std"])
        w.writerows(aggregated)
        write_out(args.out, out.getvalue())
    else:
        rows = [{"n": n, "algo": a, column: m, "std": s} for n, a, m, s in aggregated]
        write_out(args.out, json.dumps({"preset": args.preset, "rows": rows},
                                       indent=2) + "\n")
    for v in violations:
        print(f"invariant violation at {v}", file=sys.stderr)
    return 2 if violations else 0


def run_timeline(args):
    """One full kill sequence per healer on the same graph, rows side by side."""
    chunks = []
    violations = []
    for algo in LABEL_ALGOS:
        cfg = SimConfig(healer=algo, attack="nmax", topology="pa", n0=args.n,
                        m=args.m, rounds=args.rounds, seed=args.seed,
                        checks=args.checks, metrics=args.metrics)
        tr = run(cfg)
        if tr.violation:
            violations.append(f"algo={algo}: {tr.violation}")
        chunks.append((algo, tr))
    if args.format == "csv":
        text = rows_to_csv(chunks[0][1].rows, extra=[("algo", chunks[0][0])])
        for algo, tr in chunks[1:]:
            body = rows_to_csv(tr.rows, extra=[("algo", algo)])
            text += body.split("\n", 1)[1]          # drop the repeated header
        write_out(args.out, text)
    else:
        obj = {"preset": "timeline",
               "runs": [{"algo": a, **t.to_obj()} for a, t in chunks]}
        write_out(args.out, json.dumps(obj, indent=2) + "\n")
    for v in violations:
        print(f"invariant violation at {v}", file=sys.stderr)
    return 2 if violations else 0


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code
    try:
        if args.preset:
            return run_preset(args)
        return run_single(args)
    except (ValueError, OSError) as e:        # config, topology, and file errors
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
