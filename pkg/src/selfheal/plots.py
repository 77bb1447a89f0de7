"""Figure rendering for the experiment sweeps.

Reads the aggregated CSV a sweep writes (columns: n, algo, one statistic
column, std) and draws one errorbar line per algorithm. The degree figure adds
the 2*log2(n) reference curve that the load-aware healers are supposed to stay
under. This module deliberately knows nothing about the simulator: its only
input is the CSV file.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


class SchemaError(ValueError):
    """The CSV lacks the columns this figure needs."""


class EmptyInput(ValueError):
    """The CSV has no data rows."""


# figure kind -> (statistic column, y-axis caption)
KINDS = {
    "degree": ("mean_max_delta", "largest per-node degree increase"),
    "messages": ("mean_msgs_total", "messages exchanged over the run"),
    "idchanges": ("mean_id_changes", "largest per-node label-change count"),
    "stretch": ("mean_stretch", "worst distance stretch"),
}


@dataclass
class PlotSpec:
    kind: str
    in_path: str
    out_path: str
    logx: bool = False


def read_table(path, kind):
    """{algo: ([n...], [mean...], [std...])} sorted by n, algos sorted by name."""
    column, _ = KINDS[kind]
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = {"n", "algo", column, "std"} - set(header)
        if missing:
            raise SchemaError(
                f"{path} is missing column(s) {sorted(missing)} needed for "
                f"the {kind} figure (headers: {header})")
        rows = [(int(r["n"]), r["algo"], float(r[column]), float(r["std"]))
                for r in reader]
    if not rows:
        raise EmptyInput(f"{path} has headers but no data rows")
    table = {}
    for n, algo, mean, std in sorted(rows):
        ns, means, stds = table.setdefault(algo, ([], [], []))
        ns.append(n)
        means.append(mean)
        stds.append(std)
    return dict(sorted(table.items()))


def make_figure(table, kind, logx=False):
    _, caption = KINDS[kind]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for algo, (ns, means, stds) in table.items():
        ax.errorbar(ns, means, yerr=stds, marker="o", capsize=3, label=algo)
    if kind == "degree":
        ns = sorted({n for series in table.values() for n in series[0]})
        ax.plot(ns, [2 * math.log2(n) for n in ns], linestyle="--",
                color="black", label="2*log2(n)")
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel("initial network size")
    ax.set_ylabel(caption)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def figure_series(fig):
    """{label: [y...]} for every named series in the figure — errorbar series
    (whose data line hides inside a container) and plain reference lines."""
    ax = fig.axes[0]
    out = {c.get_label(): list(c[0].get_ydata()) for c in ax.containers}
    for line in ax.get_lines():
        label = line.get_label()
        if not label.startswith("_"):
            out[label] = list(line.get_ydata())
    return out


def render(spec: PlotSpec) -> str:
    """Draw the figure for `spec` and write the image; returns the output path."""
    table = read_table(spec.in_path, spec.kind)
    fig = make_figure(table, spec.kind, spec.logx)
    try:
        fig.savefig(spec.out_path, dpi=150)
    finally:
        plt.close(fig)
    return spec.out_path


def main(argv=None):
    p = argparse.ArgumentParser(
        prog="plot", description="Render a sweep CSV as a figure.")
    p.add_argument("--kind", required=True, choices=sorted(KINDS))
    p.add_argument("--in", dest="in_path", required=True, metavar="FILE")
    p.add_argument("--out", dest="out_path", required=True, metavar="FILE")
    p.add_argument("--log-x", action="store_true",
                   help="logarithmic size axis")
    try:
        args = p.parse_args(argv)
    except SystemExit as e:
        return e.code
    try:
        render(PlotSpec(args.kind, args.in_path, args.out_path, args.log_x))
    except (SchemaError, EmptyInput, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
