"""Experiment orchestration: grids of (n, gap) points, seeded trials, summaries.

Every trial draws from its own stream ``SeededRng(seed, (grid_index, trial))``,
so the records do not depend on how trials are spread over workers.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from functools import partial
from typing import List, Optional

import numpy as np

from . import bounds as bd
from .errors import ConstraintError, DomainError, NumericalError, RandRankError
from .grurv import FactorChain, as_rurv, grurv
from .labgen import KINDS, SpectrumSpec, realize_spectrum, synthesize_matrix
from .metrics import backward_error, rank_reveal_metrics, summarize
from .randhaar import SeededRng, sample_corner_smin, sample_haar_orthogonal
from .rrr import rurv

log = logging.getLogger(__name__)

MODES = ("vary-gap", "vary-dim", "single")


class ConfigError(RandRankError, ValueError):
    """An experiment configuration that cannot be run."""


@dataclass
class ExperimentConfig:
    mode: Optional[str] = None
    dist: str = "stair"
    n: List[int] = field(default_factory=lambda: [100, 300, 500])
    r: Optional[int] = None
    gap: List[float] = field(default_factory=lambda: [1e7])
    top: float = 1e13
    trials: int = 200
    delta: float = 0.03
    seed: int = 0
    percentile: float = 0.97
    output: Optional[str] = None
    format: str = "csv"
    jobs: int = 1
    # product experiments only
    exponents: List[int] = field(default_factory=lambda: [1])
    cond: float = 1e3
    oracle_every: int = 10
    oracle_max_n: int = 25

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**d)
        cfg.n = _as_list(cfg.n, int)
        cfg.gap = _as_list(cfg.gap, float)
        cfg.exponents = _as_list(cfg.exponents, int)
        return cfg

    def validate(self):
        if self.dist not in KINDS:
            raise ConfigError(f"dist must be one of {KINDS}, got {self.dist!r}")
        if not self.n or not self.gap:
            raise ConfigError("n and gap need at least one value")
        mode = self.mode or _infer_mode(self.n, self.gap)
        if mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
        if mode == "vary-gap" and len(self.n) != 1:
            raise ConfigError("vary-gap fixes a single n")
        if mode == "vary-dim" and len(self.gap) != 1:
            raise ConfigError("vary-dim fixes a single gap")
        if mode == "single" and (len(self.n) != 1 or len(self.gap) != 1):
            raise ConfigError("single mode takes one n and one gap")
        self.mode = mode
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0.0 < self.percentile <= 1.0:
            raise ConfigError(f"percentile must lie in (0, 1], got {self.percentile}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if any(n < 2 for n in self.n):
            raise ConfigError("every n must be at least 2")
        if self.r is not None and not all(1 <= self.r < n for n in self.n):
            raise ConfigError(f"r={self.r} must satisfy 1 <= r < n for every n")
        if not self.exponents or any(e not in (1, -1) for e in self.exponents):
            raise ConfigError("exponents must be a nonempty list of +1/-1")
        if not self.cond >= 1.0:
            raise ConfigError(f"cond must be >= 1, got {self.cond}")
        return self

    def split_for(self, n):
        return self.r if self.r is not None else n // 2

    def grid(self):
        """``(grid_index, n, gap)`` triples in report order."""
        if self.mode == "vary-dim":
            points = [(n, self.gap[0]) for n in self.n]
        else:
            points = [(self.n[0], g) for g in self.gap]
        return [(i, n, g) for i, (n, g) in enumerate(points)]


def _as_list(value, kind):
    if isinstance(value, (list, tuple)):
        return [kind(v) for v in value]
    return [kind(value)]


def _infer_mode(ns, gaps):
    if len(ns) == 1 and len(gaps) == 1:
        return "single"
    if len(ns) == 1:
        return "vary-gap"
    if len(gaps) == 1:
        return "vary-dim"
    raise ConfigError("cannot vary both n and gap in one experiment")


@dataclass
class GridResult:
    index: int
    n: int
    r: int
    gap: float
    dist: str
    spectrum: Optional[np.ndarray] = None
    bounds: Optional[bd.BoundSet] = None
    det_bounds: Optional[tuple] = None
    records: list = field(default_factory=list)
    summary: object = None
    error: Optional[str] = None
    error_kind: Optional[str] = None


def _rurv_trial(trial, seed, grid_index, sigma, r):
    rng = SeededRng(seed, (grid_index, trial))
    a = synthesize_matrix(sigma, rng)
    result = rurv(a, rng)
    return rank_reveal_metrics(sigma, result, r, a=a, trial_index=trial)


def build_product_chain(sigma, exponents, cond, rng):
    """Factors whose signed product has singular values exactly ``sigma``.

    With Haar ``W0 .. Wk`` and diagonal ``Di``, factor i is
    ``W(i-1) Di W(i).T`` for exponent +1 and ``W(i) Di W(i-1).T`` for -1, so
    ``Ai^mi = W(i-1) Di^mi W(i).T`` and the product is ``W0 diag(sigma) Wk.T``.
    One carrier factor (the first with exponent +1, else the first) absorbs
    ``sigma``; the others get diagonals log-uniform in ``[1, cond]``.

    Returns ``(factors, exact_product)``. ``W0`` and ``Wk`` are drawn first so
    that a one-factor chain consumes the stream exactly like
    :func:`synthesize_matrix`.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    n, k = sigma.size, len(exponents)
    w = [None] * (k + 1)
    w[0] = sample_haar_orthogonal(n, rng)
    w[k] = sample_haar_orthogonal(n, rng)
    for i in range(1, k):
        w[i] = sample_haar_orthogonal(n, rng)

    carrier = next((i for i, e in enumerate(exponents) if e == 1), 0)
    diags = [None] * k
    signed = np.ones(n)
    for i in range(k):
        if i == carrier:
            continue
        diags[i] = 10.0 ** (rng.uniform_open(n) * math.log10(cond))
        signed *= diags[i] ** exponents[i]
    diags[carrier] = (sigma / signed) ** exponents[carrier]

    factors = []
    for i, (d, e) in enumerate(zip(diags, exponents)):
        left, right = (w[i], w[i + 1]) if e == 1 else (w[i + 1], w[i])
        factors.append(((left * d[None, :]) @ right.T, e))
    exact = (w[0] * sigma[None, :]) @ w[k].T
    return factors, exact


def _grurv_trial(trial, seed, grid_index, sigma, r, exponents, cond, oracle_every, oracle_max_n):
    rng = SeededRng(seed, (grid_index, trial))
    factors, exact = build_product_chain(sigma, exponents, cond, rng)
    result = as_rurv(grurv(FactorChain(factors), rng))
    rec = rank_reveal_metrics(sigma, result, r, trial_index=trial)
    n = sigma.size
    if tuple(exponents) == (1,):
        rec.backward_error = backward_error(factors[0][0], result.u, result.r, result.v)
    elif n <= oracle_max_n and trial % oracle_every == 0:
        rec.backward_error = backward_error(exact, result.u, result.r, result.v)
    return rec


def _run_trials(fn, trials, jobs):
    if jobs == 1:
        records = [fn(t) for t in range(trials)]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunk = max(1, trials // (4 * jobs))
            records = list(pool.map(fn, range(trials), chunksize=chunk))
    return sorted(records, key=lambda rec: rec.trial_index)


def _run_grid(config, make_trial):
    config.validate()
    results = []
    for index, n, gap in config.grid():
        r = config.split_for(n)
        point = GridResult(index=index, n=n, r=r, gap=gap, dist=config.dist)
        results.append(point)
        try:
            spec = SpectrumSpec(config.dist, n, r, gap, config.top)
            sigma = realize_spectrum(spec)
            point.spectrum = sigma
            point.det_bounds = bd.deterministic_bounds(sigma, r)
            try:
                point.bounds = bd.theorem_bounds(r, n, config.delta, gap)
            except DomainError as exc:
                log.info("grid point %d: no probabilistic bounds (%s)", index, exc)
            log.info("grid point %d: n=%d r=%d gap=%g, %d trials", index, n, r, gap, config.trials)
            point.records = _run_trials(make_trial(index, sigma, r), config.trials, config.jobs)
            point.summary = summarize(point.records, point.bounds, config.percentile)
        except (ConstraintError, DomainError) as exc:
            point.error, point.error_kind = str(exc), "config"
            log.error("grid point %d failed: %s", index, exc)
        except NumericalError as exc:
            point.error, point.error_kind = str(exc), "numerical"
            log.error("grid point %d failed: %s", index, exc)
    return results


def run_experiment(config):
    """Randomized URV on synthesized matrices at every grid point of ``config``."""

    def make(index, sigma, r):
        return partial(_rurv_trial, seed=config.seed, grid_index=index, sigma=sigma, r=r)

    return _run_grid(config, make)


def run_grurv_experiment(config):
    """As :func:`run_experiment`, factoring a product chain whose product has the
    grid point's spectrum. ``backward_error`` is filled for a one-factor
    (+1) chain on every trial and otherwise, for ``n <= oracle_max_n``, on
    every ``oracle_every``-th trial, against the exactly known product.
    """

    def make(index, sigma, r):
        return partial(
            _grurv_trial, seed=config.seed, grid_index=index, sigma=sigma, r=r,
            exponents=tuple(config.exponents), cond=config.cond,
            oracle_every=config.oracle_every, oracle_max_n=config.oracle_max_n,
        )

    return _run_grid(config, make)


# -- Monte Carlo of the Haar corner ------------------------------------------


@dataclass
class TailRow:
    delta: float
    threshold: float
    empirical: float
    ci_low: float
    ci_high: float
    bound: Optional[float]
    slack: Optional[float]
    ok: Optional[bool]


@dataclass
class McResult:
    r: int
    n: int
    trials: int
    seed: int
    samples: np.ndarray
    rows: List[TailRow]
    ks_distance: Optional[float] = None


def wilson_interval(successes, trials, z=3.0):
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _corner_sample(trial, seed, n, r):
    return sample_corner_smin(n, r, SeededRng(seed, (0, trial)))


def sample_corner_batch(n, r, trials, seed, jobs=1):
    fn = partial(_corner_sample, seed=seed, n=n, r=r)
    if jobs == 1:
        return np.array([fn(t) for t in range(trials)])
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return np.array(list(pool.map(fn, range(trials), chunksize=max(1, trials // (4 * jobs)))))


def density_reduction(r, n):
    """Density parameters for ``s`` at (r, n), reducing r > n/2 to n - r; None if r = n/2."""
    rr = n - r if 2 * r > n else r
    return bd.DensityParams(rr, n) if 2 * rr < n else None


def ks_against_density(samples, params):
    """Kolmogorov-Smirnov distance between ``samples**2`` and the quadrature CDF."""
    xs = np.sort(np.asarray(samples) ** 2)
    cdf = bd.density_s2_cdf_sorted(params, xs)
    m = xs.size
    upper = np.arange(1, m + 1) / m - cdf
    lower = cdf - np.arange(0, m) / m
    return float(max(upper.max(), lower.max()))


def run_mc_svalue(r, n, trials, deltas, seed, with_bound=True, compare_density=None, jobs=1):
    """Empirical ``P[s <= delta / sqrt(r (n - r))]`` next to ``min(2.02 delta, 1)``.

    The bound column is empty when ``with_bound`` is off or (r, n) is outside
    the bound's validity range. ``compare_density`` (default: on when the
    bound is off) adds the KS distance against the closed-form density.
    """
    if not 1 <= r < n:
        raise ConfigError(f"need 1 <= r < n, got r={r}, n={n}")
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    samples = sample_corner_batch(n, r, trials, seed, jobs)
    scale = math.sqrt(r * (n - r))
    rows = []
    for delta in deltas:
        threshold = delta / scale
        hits = int(np.sum(samples <= threshold))
        lo, hi = wilson_interval(hits, trials)
        bound = slack = ok = None
        if with_bound and r > bd.LEMMA_MIN_DIM and n - r > bd.LEMMA_MIN_DIM:
            bound = min(2.02 * delta, 1.0)
            slack = 3.0 * math.sqrt(bound / trials)
            ok = hits / trials <= bound + slack
        rows.append(TailRow(delta, threshold, hits / trials, lo, hi, bound, slack, ok))
    result = McResult(r, n, trials, seed, samples, rows)
    if compare_density is None:
        compare_density = not with_bound
    params = density_reduction(r, n) if compare_density else None
    if params is not None:
        result.ks_distance = ks_against_density(samples, params)
    return result
