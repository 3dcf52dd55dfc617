"""Render experiment CSVs into figure images.

Every plotted number comes from a CSV cell; the only computation performed
here is averaging MSE across trials per (label, parameter, n).  The input
header must match the experiment schema exactly; anything else is a schema
error that names the offending columns.  Output is PNG at a fixed 150 dpi
through the headless Agg backend.
"""

from __future__ import annotations

import argparse
import csv
import sys
from collections import defaultdict
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

EXPECTED_HEADER = [
    "experiment",
    "label",
    "parameter",
    "n",
    "trial",
    "mse",
    "bias_sq",
    "variance",
    "logging_value",
    "target_value",
]

DPI = 150


class SchemaError(Exception):
    pass


@dataclass(frozen=True)
class PlotSpec:
    figure: str
    csv_path: str
    out_path: str
    log_mse: bool = True


@dataclass(frozen=True)
class Row:
    experiment: str
    label: str
    parameter: float
    n: int
    trial: int
    mse: float
    bias_sq: float
    variance: float
    logging_value: float
    target_value: float


def load_rows(csv_path: str) -> list:
    with open(csv_path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"empty file, expected header columns: {', '.join(EXPECTED_HEADER)}")
        if header != EXPECTED_HEADER:
            missing = [c for c in EXPECTED_HEADER if c not in header]
            if missing:
                raise SchemaError(f"missing column(s): {', '.join(missing)}")
            raise SchemaError(
                f"header mismatch: expected {','.join(EXPECTED_HEADER)} got {','.join(header)}"
            )
        rows = []
        for record in reader:
            rows.append(
                Row(
                    experiment=record[0],
                    label=record[1],
                    parameter=float(record[2]),
                    n=int(record[3]),
                    trial=int(record[4]),
                    mse=float(record[5]),
                    bias_sq=float(record[6]),
                    variance=float(record[7]),
                    logging_value=float(record[8]),
                    target_value=float(record[9]),
                )
            )
    return rows


def _trial_means(rows):
    """label -> sorted arrays (parameter, mean mse, mean logging value)."""
    acc = defaultdict(lambda: defaultdict(lambda: ([], [])))
    for r in rows:
        mses, values = acc[r.label][r.parameter]
        mses.append(r.mse)
        values.append(r.logging_value)
    out = {}
    for label, by_param in acc.items():
        params = np.array(sorted(by_param))
        mse = np.array([np.mean(by_param[p][0]) for p in params])
        value = np.array([np.mean(by_param[p][1]) for p in params])
        out[label] = (params, mse, value)
    return out


def _sweep_labels(means):
    return [label for label, (params, _, _) in means.items() if len(params) > 1]


def _reference_labels(means):
    return [label for label, (params, _, _) in means.items() if len(params) == 1]


def _finish(fig, spec: PlotSpec):
    fig.savefig(spec.out_path, dpi=DPI)
    plt.close(fig)


def _maybe_log_x(ax, params):
    positive = params[params > 0]
    if len(positive) > 1 and positive.max() / positive.min() > 50:
        ax.set_xscale("log")


def _render_histograms(rows, spec: PlotSpec):
    estimate_rows = [r for r in rows if r.label.endswith(":estimate")]
    if estimate_rows:
        panels = sorted({(r.label, r.n) for r in estimate_rows})
        values = {key: [r.parameter for r in estimate_rows if (r.label, r.n) == key] for key in panels}
        x_label = "estimate"
    else:
        base = [r for r in rows if not r.label.endswith(":mc")]
        panels = sorted({(r.label, r.n) for r in base})
        values = {key: [r.mse for r in base if (r.label, r.n) == key] for key in panels}
        x_label = "mse"
    ncols = max(1, len(panels))
    fig, axes = plt.subplots(1, ncols, figsize=(4 * ncols, 3.2), squeeze=False)
    for ax, key in zip(axes[0], panels):
        ax.hist(values[key], bins=40)
        ax.set_title(f"{key[0]} (n={key[1]})", fontsize=9)
        ax.set_xlabel(x_label)
        ax.set_ylabel("count")
    if not panels:
        axes[0][0].set_xlabel(x_label)
    fig.tight_layout()
    _finish(fig, spec)


def _render_scan(rows, spec: PlotSpec):
    means = _trial_means(rows)
    labels = _sweep_labels(means) or list(means)
    ncols = max(1, len(labels))
    fig, axes = plt.subplots(1, ncols, figsize=(4.5 * ncols, 3.4), squeeze=False)
    for ax, label in zip(axes[0], labels):
        params, mse, _ = means[label]
        ax.plot(params, mse, lw=1.2)
        best = int(np.argmin(mse))
        ax.plot(params[best], mse[best], marker="*", markersize=14, color="tab:red")
        if spec.log_mse and np.all(mse > 0):
            ax.set_yscale("log")
        ax.set_title(label, fontsize=9)
        ax.set_xlabel("logging propensity on the first action")
        ax.set_ylabel("mse")
    fig.tight_layout()
    _finish(fig, spec)


def _render_noise_curves(rows, spec: PlotSpec):
    means = _trial_means(rows)
    fig, ax = plt.subplots(figsize=(6, 4))
    for label in sorted(_sweep_labels(means)):
        params, mse, _ = means[label]
        ax.plot(params, mse, marker="o", ms=3, label=label)
    for label in sorted(_reference_labels(means)):
        _, mse, _ = means[label]
        ax.axhline(mse[0], ls="--", color="tab:red", label=label)
    if spec.log_mse:
        ax.set_yscale("log")
    ax.set_xlabel("estimate noise (sd)")
    ax.set_ylabel("mse")
    if means:
        ax.legend(fontsize=8)
    fig.tight_layout()
    _finish(fig, spec)


def _render_shrinkage(rows, spec: PlotSpec):
    means = _trial_means(rows)
    fig, (left, right) = plt.subplots(1, 2, figsize=(11, 4))

    # (a) error vs shrinkage weight, one curve per noise level, star markers
    # at the empirically fitted weights
    for label in sorted(means):
        if label.startswith("w-sweep"):
            params, mse, _ = means[label]
            left.plot(params, mse, marker="o", ms=3, label=label)
    star_rows = [r for r in rows if r.label.startswith("w-star")]
    if star_rows:
        left.scatter(
            [r.parameter for r in star_rows],
            [r.mse for r in star_rows],
            marker="*",
            s=90,
            color="tab:red",
            zorder=5,
            label="fitted weight",
        )
    if "on-policy" in means:
        left.axhline(means["on-policy"][1][0], ls="--", color="tab:red", label="on-policy")
    left.set_yscale("log")
    left.set_xlabel("shrinkage weight")
    left.set_ylabel("mse")
    if means:
        left.legend(fontsize=7)

    # (b) error and accrued value vs estimate noise
    value_axis = right.twinx()
    for label in ("shrunk-optimal", "plugin-optimal"):
        if label in means:
            params, mse, value = means[label]
            right.plot(params, mse, marker="o", ms=3, label=f"{label} mse")
            value_axis.plot(params, value, ls=":", label=f"{label} value")
    if "on-policy" in means:
        right.axhline(means["on-policy"][1][0], ls="--", color="tab:red", label="on-policy mse")
        target_value = np.mean([r.target_value for r in rows]) if rows else None
        if target_value is not None:
            value_axis.axhline(target_value, ls="-.", color="gray", label="target value")
    right.set_yscale("log")
    right.set_xlabel("estimate noise (sd)")
    right.set_ylabel("mse")
    value_axis.set_ylabel("policy value")
    if means:
        right.legend(fontsize=7, loc="upper left")
    fig.tight_layout()
    _finish(fig, spec)


def _render_greediness(rows, spec: PlotSpec):
    means = _trial_means(rows)
    sweeps = sorted(_sweep_labels(means))
    refs = sorted(_reference_labels(means))
    ncols = max(1, len(sweeps))
    fig, axes = plt.subplots(1, ncols, figsize=(4 * ncols, 3.4), squeeze=False)
    for ax, label in zip(axes[0], sweeps):
        params, mse, _ = means[label]
        ax.plot(params, mse, lw=1.2)
        for ref in refs:
            style = "--" if ref == "on-policy" else ":"
            ax.axhline(means[ref][1][0], ls=style, label=ref)
        if spec.log_mse and np.all(mse > 0):
            ax.set_yscale("log")
        _maybe_log_x(ax, params)
        ax.set_title(label, fontsize=9)
        ax.set_xlabel("greediness parameter")
        ax.set_ylabel("mse")
        if refs:
            ax.legend(fontsize=7)
    fig.tight_layout()
    _finish(fig, spec)


_RENDERERS = {
    "fig1": _render_histograms,
    "fig2": _render_scan,
    "fig3": _render_noise_curves,
    "fig5": _render_shrinkage,
    "fig6": _render_greediness,
    "fig6_small": _render_greediness,
    "fig6_large": _render_greediness,
    "figD1": _render_greediness,
}


def render(spec: PlotSpec) -> None:
    rows = load_rows(spec.csv_path)
    renderer = _RENDERERS.get(spec.figure, _render_noise_curves)
    renderer(rows, spec)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="render", description="Render an experiment CSV to a PNG figure.")
    parser.add_argument("--figure", required=True, help="figure id (fig1, fig2, fig3, fig5, fig6_small, ...)")
    parser.add_argument("--csv", required=True, help="input CSV (experiment schema)")
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--linear-mse", action="store_true", help="keep the MSE axis linear")
    args = parser.parse_args(argv)
    spec = PlotSpec(figure=args.figure, csv_path=args.csv, out_path=args.out, log_mse=not args.linear_mse)
    try:
        render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
