"""Test matrices with a prescribed singular spectrum and Haar singular vectors."""

from dataclasses import dataclass

import numpy as np

from .errors import ConstraintError
from .randhaar import sample_haar_orthogonal

KINDS = ("stair", "logspace")


@dataclass(frozen=True)
class SpectrumSpec:
    kind: str
    n: int
    r: int
    gap: float
    top: float = 1e13

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConstraintError(f"unknown spectrum kind {self.kind!r}")
        if not 1 <= self.r < self.n:
            raise ConstraintError(f"split index must satisfy 1 <= r < n, got r={self.r}, n={self.n}")
        if self.gap < 1:
            raise ConstraintError(f"gap must be >= 1, got {self.gap}")


def realize_spectrum(spec):
    """Descending singular values for ``spec``.

    stair:    ``gap`` repeated ``r`` times, then ones.
    logspace: ``top`` down to 1 with a constant ratio everywhere except a
              single step of size ``gap`` between positions r and r+1.
    """
    n, r, gap = spec.n, spec.r, float(spec.gap)
    if spec.kind == "stair":
        return np.concatenate([np.full(r, gap), np.ones(n - r)])

    top = float(spec.top)
    if gap > top:
        raise ConstraintError(f"gap {gap:g} exceeds top {top:g}")
    if n == 2:
        if gap != top:
            raise ConstraintError("for n = 2 the only step is the gap, so gap must equal top")
        return np.array([top, 1.0])
    log_rho = (np.log10(top) - np.log10(gap)) / (n - 2)
    steps = np.full(n - 1, log_rho)
    steps[r - 1] = np.log10(gap)
    # Cumulate from the bottom so that sigma_n is exactly 1.
    logs = np.concatenate([np.cumsum(steps[::-1])[::-1], [0.0]])
    sigma = 10.0 ** logs
    sigma[0] = top
    # A unit gap next to the pinned top can round one ulp above it.
    return np.minimum.accumulate(sigma)


def synthesize_matrix(sigma, rng):
    """``P @ diag(sigma) @ Q.T`` with independent Haar ``P`` and ``Q`` (drawn in that order)."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.ndim != 1 or np.any(sigma <= 0):
        raise ConstraintError("sigma must be a 1-D array of positive values")
    n = sigma.size
    p = sample_haar_orthogonal(n, rng)
    q = sample_haar_orthogonal(n, rng)
    return (p * sigma[None, :]) @ q.T
