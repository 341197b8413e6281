"""Report emission: delimited records and summaries plus matplotlib figures.

Files written into the output directory:

    records.csv      one row per trial
    summary.csv      one row per (grid point, metric)   -- or summary.json
    histogram.csv    64 log10-spaced bins per grid point and metric
    spectrum.csv     realized singular values per grid point
    plotdata.svg     box plots of each metric across the grid, with bounds
    histogram.svg    histograms for the last grid point
"""

import csv
import json
import math
import os

import numpy as np

from .errors import StructuralError
from .metrics import METRICS, Summary

RECORD_COLUMNS = (
    "grid_n", "grid_gap", "trial", "ratio1", "ratio2", "norm3",
    "backward_error", "orth_u", "orth_v", "flagged",
)
HIST_BINS = 64


def fmt(x):
    """17 significant digits, so floats round-trip exactly; blank for None."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _done(points):
    return [p for p in points if p.summary is not None]


def write_records(points, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_COLUMNS)
        for p in points:
            for rec in p.records:
                w.writerow([
                    fmt(p.n), fmt(p.gap), fmt(rec.trial_index), fmt(rec.ratio1),
                    fmt(rec.ratio2), fmt(rec.norm3), fmt(rec.backward_error),
                    fmt(rec.orth_u), fmt(rec.orth_v), fmt(rec.flagged),
                ])


def summary_entry(p):
    """JSON-ready description of one grid point."""
    return {
        "grid_index": p.index,
        "n": p.n,
        "r": p.r,
        "gap": p.gap,
        "dist": p.dist,
        "bounds": None if p.bounds is None else p.bounds.to_dict(),
        "deterministic_bounds": None if p.det_bounds is None else list(p.det_bounds),
        "summary": None if p.summary is None else p.summary.to_dict(),
        "error": p.error,
    }


def read_summary_json(path):
    """Inverse of the JSON summary writer: list of entries with ``Summary`` objects."""
    with open(path) as fh:
        entries = json.load(fh)
    for e in entries:
        if e["summary"] is not None:
            e["summary"] = Summary.from_dict(e["summary"])
    return entries


SUMMARY_COLUMNS = (
    "grid_n", "grid_r", "grid_gap", "dist", "metric", "trials", "flagged", "min", "q1",
    "median", "q3", "pct", "max", "percentile", "bound", "exceed_count",
    "b1", "b2", "b3", "b4", "b4_applicable", "det_bound",
)


def write_summary_csv(points, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for p in _done(points):
            b = p.bounds
            for j, name in enumerate(METRICS):
                m = p.summary.metrics[name]
                # The sharp norm bound is suppressed where its hypothesis fails.
                b4 = b.b4 if b is not None and b.b4_applicable else None
                w.writerow([
                    fmt(p.n), fmt(p.r), fmt(p.gap), p.dist, name,
                    fmt(p.summary.n_trials), fmt(p.summary.n_flagged),
                    fmt(m.min), fmt(m.q1), fmt(m.median), fmt(m.q3), fmt(m.pct), fmt(m.max),
                    fmt(p.summary.percentile), fmt(m.bound), fmt(m.exceed_count),
                    fmt(None if b is None else b.b1), fmt(None if b is None else b.b2),
                    fmt(None if b is None else b.b3), fmt(b4),
                    fmt(None if b is None else b.b4_applicable),
                    fmt(p.det_bounds[j]),
                ])


def write_summary_json(points, path):
    with open(path, "w") as fh:
        json.dump([summary_entry(p) for p in points], fh, indent=2)


def write_histograms(points, path, bins=HIST_BINS):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("grid_n", "grid_gap", "metric", "bin", "log10_lo", "log10_hi", "count"))
        for p in _done(points):
            for name in METRICS:
                vals = np.array([getattr(rec, name) for rec in p.records if not rec.flagged])
                vals = np.log10(vals[vals > 0])
                if vals.size == 0:
                    continue
                lo, hi = float(vals.min()), float(vals.max())
                if hi == lo:
                    lo, hi = lo - 0.5, hi + 0.5
                counts, edges = np.histogram(vals, bins=bins, range=(lo, hi))
                for i, c in enumerate(counts):
                    w.writerow((fmt(p.n), fmt(p.gap), name, i, fmt(edges[i]), fmt(edges[i + 1]), int(c)))


def write_spectra(points, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("grid_n", "grid_gap", "i", "sigma"))
        for p in points:
            if p.spectrum is None:
                continue
            for i, s in enumerate(p.spectrum, start=1):
                w.writerow((fmt(p.n), fmt(p.gap), i, fmt(s)))


def emit_report(points, fmt_name, out_dir, plots=True):
    """Write every report file for ``points`` into ``out_dir``; returns the paths."""
    if not points or not _done(points):
        raise StructuralError("nothing to report: no grid point produced a summary")
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "records": os.path.join(out_dir, "records.csv"),
        "summary": os.path.join(out_dir, f"summary.{fmt_name}"),
        "histogram": os.path.join(out_dir, "histogram.csv"),
        "spectrum": os.path.join(out_dir, "spectrum.csv"),
    }
    write_records(points, paths["records"])
    if fmt_name == "json":
        write_summary_json(points, paths["summary"])
    else:
        write_summary_csv(points, paths["summary"])
    write_histograms(points, paths["histogram"])
    write_spectra(points, paths["spectrum"])
    if plots:
        from .plots import plot_boxes, plot_histograms

        paths["plotdata"] = plot_boxes(points, os.path.join(out_dir, "plotdata.svg"))
        paths["histogram_fig"] = plot_histograms(_done(points)[-1], os.path.join(out_dir, "histogram.svg"))
    return paths


def write_mc_table(result, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("r", "n", "trials", "delta", "threshold", "empirical", "ci_low", "ci_high",
                    "bound", "slack", "ok"))
        for row in result.rows:
            w.writerow((result.r, result.n, result.trials, fmt(row.delta), fmt(row.threshold),
                        fmt(row.empirical), fmt(row.ci_low), fmt(row.ci_high), fmt(row.bound),
                        fmt(row.slack), "" if row.ok is None else fmt(row.ok)))


def write_mc_histogram(result, path, bins=HIST_BINS):
    """Histogram of ``s * sqrt(r (n - r))``, the scale on which the tail bound lives."""
    scaled = result.samples * math.sqrt(result.r * (result.n - result.r))
    counts, edges = np.histogram(scaled, bins=bins)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("bin", "lo", "hi", "count"))
        for i, c in enumerate(counts):
            w.writerow((i, fmt(edges[i]), fmt(edges[i + 1]), int(c)))
