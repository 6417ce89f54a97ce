#!/usr/bin/env python3
"""Render experiment CSVs into figures.

    python plot.py --kind convergence --in trace.csv [--in trace2.csv] --out fig.png
    python plot.py --kind scaling     --in sweep_agg.csv --out fig.png
    python plot.py --kind phase       --in phase.csv --out fig.png

Three kinds, matching the emitting commands' schemas:

* convergence: trace CSVs (iter,loss,step,dist,sin_sq,opt_err,ms); plots the
  statistical error ``dist`` and the optimization error ``opt_err`` against
  the iteration count on a log y-axis.
* scaling: sweep aggregate CSVs (point,x,metric,n,mean,se); mean error with
  standard-error bars against the ratio x on log-log axes.
* phase: phase CSVs (control,size,frequency,trials,failures); a heatmap of
  the recovery frequency over the (control, size) grid.

The input files are never modified.  Exit code 2 signals a schema mismatch
and names the offending column; an empty-but-headered CSV renders empty axes
and exits 0.
"""

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SCHEMAS = {
    "convergence": ["iter", "loss", "step", "dist", "sin_sq", "opt_err", "ms"],
    "scaling": ["point", "x", "metric", "n", "mean", "se"],
    "phase": ["control", "size", "frequency", "trials", "failures"],
}

FIGSIZE = (6.4, 4.8)


class SchemaError(Exception):
    def __init__(self, column, path):
        super().__init__(f"column {column!r} missing or misplaced in {path}")
        self.column = column


def read_series(kind, path):
    """Parse one CSV into {column: list-of-floats}; strings stay strings.

    The header must match the kind's schema exactly (fixed column order).
    """
    expected = SCHEMAS[kind]
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(expected[0], path) from None
        for want, got in zip(expected, header + [None] * len(expected)):
            if got != want:
                raise SchemaError(want, path)
        if len(header) != len(expected):
            raise SchemaError(header[len(expected)], path)
        columns = {name: [] for name in expected}
        for row in reader:
            if not row:
                continue
            for name, value in zip(expected, row):
                if name == "metric":
                    columns[name].append(value)
                else:
                    columns[name].append(float(value))
    return columns


def render_convergence(paths, out):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for path in paths:
        cols = read_series("convergence", path)
        label = path.rsplit("/", 1)[-1]
        if cols["iter"]:
            ax.semilogy(cols["iter"], cols["dist"], label=f"{label}: statistical error")
            ax.semilogy(cols["iter"], cols["opt_err"], "--", label=f"{label}: optimization error")
    ax.set_xlabel("iteration")
    ax.set_ylabel("error (log scale)")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=8)
    fig.savefig(out, dpi=100, metadata={"Software": None})
    plt.close(fig)


def render_scaling(paths, out):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    any_points = False
    for path in paths:
        cols = read_series("scaling", path)
        if cols["x"]:
            any_points = True
            ax.errorbar(cols["x"], cols["mean"], yerr=cols["se"], fmt="o",
                        capsize=3, label=path.rsplit("/", 1)[-1])
    ax.set_xlabel("ratio")
    ax.set_ylabel("mean error")
    if any_points:
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.legend(fontsize=8)
    fig.savefig(out, dpi=100, metadata={"Software": None})
    plt.close(fig)


def render_phase(paths, out):
    controls, sizes, freq = [], [], {}
    for path in paths:
        cols = read_series("phase", path)
        for c, s, f in zip(cols["control"], cols["size"], cols["frequency"]):
            if c not in controls:
                controls.append(c)
            if s not in sizes:
                sizes.append(s)
            freq[(c, s)] = f
    fig, ax = plt.subplots(figsize=FIGSIZE)
    if controls:
        grid = [[freq.get((c, s), float("nan")) for c in controls] for s in sizes]
        im = ax.imshow(grid, origin="lower", aspect="auto", vmin=0.0, vmax=1.0,
                       cmap="viridis", interpolation="nearest")
        ax.set_xticks(range(len(controls)), [f"{c:g}" for c in controls])
        ax.set_yticks(range(len(sizes)), [f"{s:g}" for s in sizes])
        fig.colorbar(im, ax=ax, label="recovery frequency")
    ax.set_xlabel("control value")
    ax.set_ylabel("size")
    fig.savefig(out, dpi=100, metadata={"Software": None})
    plt.close(fig)


RENDERERS = {
    "convergence": render_convergence,
    "scaling": render_scaling,
    "phase": render_phase,
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--kind", required=True, choices=sorted(SCHEMAS))
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="CSV", help="input CSV (repeatable)")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        RENDERERS[args.kind](args.inputs, args.out)
    except SchemaError as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
