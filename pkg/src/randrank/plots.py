"""matplotlib figures for experiment reports (SVG, Agg backend, no display)."""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .metrics import METRICS  # noqa: E402

LABELS = {
    "ratio1": r"$\sigma_r / \sigma_{\min}(R_{11})$",
    "ratio2": r"$\sigma_{\max}(R_{22}) / \sigma_{r+1}$",
    "norm3": r"$\|R_{11}^{-1} R_{12}\|_2$",
}

# Fixed ids and no timestamp, so the same data gives the same file.
matplotlib.rcParams["svg.hashsalt"] = "randrank"
_SVG_META = {"Date": None}


def _xaxis(points):
    varying_gap = len({p.gap for p in points}) > 1
    if varying_gap:
        return [math.log10(p.gap) for p in points], r"$\log_{10}(\sigma_r/\sigma_{r+1})$"
    return [p.n for p in points], "n"


def plot_boxes(points, path):
    points = [p for p in points if p.summary is not None]
    xs, xlabel = _xaxis(points)
    width = 0.4 * (min(np.diff(xs)) if len(xs) > 1 else 1.0)
    fig, axes = plt.subplots(2, 2, figsize=(10, 8))
    for j, (ax, name) in enumerate(zip(axes.flat, METRICS)):
        data = [[getattr(rec, name) for rec in p.records if not rec.flagged] for p in points]
        ax.boxplot(data, positions=xs, widths=width, whis=(0, 100), manage_ticks=False)
        pct = [p.summary.metrics[name].pct for p in points]
        ax.plot(xs, pct, "k-", label=f"{points[0].summary.percentile:.0%} percentile")
        bound = [p.summary.metrics[name].bound for p in points]
        if any(b is not None for b in bound):
            bx = [x for x, b in zip(xs, bound) if b is not None]
            ax.plot(bx, [b for b in bound if b is not None], "b*-", label="probabilistic bound")
        det = [p.det_bounds[j] for p in points]
        ax.plot(xs, det, "b:", label="deterministic bound")
        ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_title(LABELS[name])
        ax.legend(fontsize=7)
    ax = axes.flat[3]
    example = points[-1]
    ax.semilogy(np.arange(1, example.n + 1), example.spectrum, "b.", markersize=2)
    ax.set_title(f"singular values (n={example.n}, gap={example.gap:g})")
    ax.set_xlabel("i")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path


def plot_histograms(point, path, bins=64):
    fig, axes = plt.subplots(1, 3, figsize=(13, 3.8))
    for ax, name in zip(axes, METRICS):
        vals = np.array([getattr(rec, name) for rec in point.records if not rec.flagged])
        vals = vals[vals > 0]
        m = point.summary.metrics[name]
        ax.hist(np.log10(vals), bins=bins, color="0.7")
        ax.axvline(math.log10(m.pct), color="k", label="percentile")
        if m.bound is not None:
            ax.axvline(math.log10(m.bound), color="b", marker="*", label="bound")
        ax.set_xlabel(r"$\log_{10}$ " + LABELS[name])
        ax.legend(fontsize=7)
    fig.suptitle(f"{point.dist}, n={point.n}, gap={point.gap:g}")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path
