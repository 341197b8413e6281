"""Per-trial measurement of the rank-revealing quantities and their summaries."""

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .dense import EPS, jacobi_svd_values, solve_upper_triangular, spectral_norm
from .errors import SingularMatrixError, StructuralError
from .rrr import split_r

METRICS = ("ratio1", "ratio2", "norm3")


@dataclass
class TrialRecord:
    """One factorization measured against the spectrum it was built from.

    ratio1 = sigma_r / sigma_min(R11), ratio2 = sigma_max(R22) / sigma_{r+1},
    norm3 = |R11^-1 R12|_2. A trial whose R11 is singular is ``flagged`` and
    carries NaN for the quantities that could not be formed.
    """

    trial_index: int
    ratio1: float
    ratio2: float
    norm3: float
    backward_error: Optional[float] = None
    orth_u: Optional[float] = None
    orth_v: Optional[float] = None
    flagged: bool = False


def orthogonality_defect(q):
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise StructuralError(f"orthogonality defect needs a square matrix, got {q.shape}")
    return float(np.linalg.norm(q.T @ q - np.eye(q.shape[0])))


def backward_error(a, u, r, v):
    """Relative Frobenius residual ``|a - u r v| / |a|``."""
    a = np.asarray(a, dtype=np.float64)
    residual = np.linalg.norm(a - u @ r @ v)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return 0.0 if residual == 0.0 else math.inf
    return float(residual / scale)


def rank_reveal_metrics(sigma, result, r, a=None, trial_index=0):
    """Measure ``result`` (anything with ``u``, ``r``, ``v``) at split index ``r``.

    ``sigma`` is the true descending spectrum of the factored matrix. When
    ``a`` is given the backward error is filled in as well.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    r11, r12, r22 = split_r(result, r)
    ratio2 = spectral_norm(r22) / sigma[r]
    try:
        smin = jacobi_svd_values(r11)[-1]
        ratio1 = sigma[r - 1] / smin if smin > 0 else math.inf
        norm3 = spectral_norm(solve_upper_triangular(r11, r12))
        flagged = not (math.isfinite(ratio1) and math.isfinite(norm3))
    except SingularMatrixError:
        ratio1, norm3, flagged = math.nan, math.nan, True
    return TrialRecord(
        trial_index=trial_index,
        ratio1=float(ratio1),
        ratio2=float(ratio2),
        norm3=float(norm3),
        backward_error=None if a is None else backward_error(a, result.u, result.r, result.v),
        orth_u=orthogonality_defect(result.u),
        orth_v=orthogonality_defect(result.v),
        flagged=flagged,
    )


def percentile(sorted_values, p):
    """Linear interpolation at zero-based index ``p * (N - 1)`` of sorted data."""
    n = len(sorted_values)
    pos = p * (n - 1)
    lo = math.floor(pos)
    hi = min(lo + 1, n - 1)
    frac = pos - lo
    return float(sorted_values[lo] + (sorted_values[hi] - sorted_values[lo]) * frac)


@dataclass
class MetricSummary:
    min: float
    q1: float
    median: float
    q3: float
    pct: float
    max: float
    bound: Optional[float]
    exceed_count: int


@dataclass
class Summary:
    """Order statistics of every metric over the unflagged trials of one grid point."""

    n_trials: int
    n_flagged: int
    percentile: float
    metrics: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        metrics = {k: MetricSummary(**v) for k, v in d["metrics"].items()}
        return cls(d["n_trials"], d["n_flagged"], d["percentile"], metrics)


def metric_bounds(bounds):
    """Map each metric to the probabilistic bound it is compared against (or None)."""
    if bounds is None:
        return dict.fromkeys(METRICS)
    return {"ratio1": bounds.b1, "ratio2": bounds.b2, "norm3": bounds.norm3_bound}


def summarize(records, bounds=None, pct=0.97):
    if not records:
        raise StructuralError("cannot summarize an empty record list")
    kept = [rec for rec in records if not rec.flagged]
    limits = metric_bounds(bounds)
    out = Summary(n_trials=len(records), n_flagged=len(records) - len(kept), percentile=pct)
    for name in METRICS:
        values = sorted(getattr(rec, name) for rec in kept)
        limit = limits[name]
        if not values:
            nan = math.nan
            out.metrics[name] = MetricSummary(nan, nan, nan, nan, nan, nan, limit, 0)
            continue
        exceed = 0 if limit is None else sum(v > limit for v in values)
        out.metrics[name] = MetricSummary(
            min=values[0],
            q1=percentile(values, 0.25),
            median=percentile(values, 0.5),
            q3=percentile(values, 0.75),
            pct=percentile(values, pct),
            max=values[-1],
            bound=limit,
            exceed_count=int(exceed),
        )
    return out


def stability_budget(n):
    """The ``100 n eps`` tolerance used for reconstruction residuals."""
    return 100.0 * n * EPS
