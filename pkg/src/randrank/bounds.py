"""Closed-form probability machinery for the smallest singular value of a
Haar corner, and the rank-revealing bounds built on it.

``s`` denotes the smallest singular value of the leading ``r x r`` block of
an ``n x n`` Haar orthogonal matrix. :func:`density_s2` is the density of
``s**2`` (not of ``s``); it integrates to one over (0, 1) and for
``r = 1, n = 3`` reduces to ``1 / (2 sqrt(x))``, the law of ``U**2`` with
``U`` uniform.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConvergenceError, DomainError

# Lanczos approximation, g = 7, nine terms.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def log_gamma(x):
    """Natural log of the gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"log_gamma needs a finite positive argument, got {x}")
    if x < 0.5:
        # Lanczos below is accurate for x >= 1/2; shift up by one.
        return log_gamma(x + 1.0) - math.log(x)
    z = x - 1.0
    series = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        series += _LANCZOS_COEF[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(series)


@dataclass(frozen=True)
class DensityParams:
    r: int
    n: int

    def __post_init__(self):
        if not (1 <= self.r and 2 * self.r < self.n):
            raise DomainError(
                f"density parameters need 1 <= r < n/2, got r={self.r}, n={self.n}; "
                "reduce r > n/2 to n - r first"
            )

    @property
    def hyp_params(self):
        """``(a, b, c)`` of the hypergeometric factor; ``c - a - b`` is 3/2."""
        r, n = self.r, self.n
        return 0.5 * (n - r - 1), 0.5 * (r - 1), 0.5 * (n - 1) + 1.0


def log_normalization_constant(p):
    r, n = p.r, p.n
    return (
        math.log(0.5 * r * (n - r))
        + log_gamma(0.5 * (n - r + 1))
        + log_gamma(0.5 * (r + 1))
        - log_gamma(0.5)
        - log_gamma(0.5 * (n + 1))
    )


def normalization_constant(p):
    return math.exp(log_normalization_constant(p))


def _gauss_series(a, b, c, z, max_terms=1_000_000):
    """Plain Gauss series of 2F1 at ``|z| < 1``; also returns the sum of |terms|."""
    term = 1.0
    total = 1.0
    magnitude = 1.0
    for k in range(max_terms):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total += term
        magnitude += abs(term)
        if term == 0.0 or (abs(term) <= 1e-17 * abs(total) and k > a + b):
            return total, magnitude
    raise ConvergenceError(
        f"2F1 series did not converge in {max_terms} terms at z={z}", measure=abs(term)
    )


def _log_rgamma_sign(x):
    """``(log|1/Gamma(x)|, sign)``; sign 0 at the poles (x = 0, -1, ...)."""
    if x <= 0 and x == math.floor(x):
        return -math.inf, 0
    if x > 0:
        return -log_gamma(x), 1
    # Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
    s = math.sin(math.pi * x)
    return log_gamma(1.0 - x) - math.log(math.pi / abs(s)), (1 if s > 0 else -1)


def _log_gamma_signed(x):
    lr, sign = _log_rgamma_sign(x)
    return -lr, sign


def hyp2f1_closed_at_one(a, b, c):
    """Gauss's value of 2F1(a, b; c; 1), valid for ``c - a - b > 0``."""
    if not c - a - b > 0:
        raise DomainError("2F1 at argument 1 diverges unless c - a - b > 0")
    lg_cab, s1 = _log_gamma_signed(c - a - b)
    lg_c, s2 = _log_gamma_signed(c)
    lr_ca, s3 = _log_rgamma_sign(c - a)
    lr_cb, s4 = _log_rgamma_sign(c - b)
    sign = s1 * s2 * s3 * s4
    if sign == 0:
        return 0.0
    return sign * math.exp(lg_c + lg_cab + lr_ca + lr_cb)


# Accept up to this many lost digits from the connection formula before
# falling back to the direct series.
_MAX_CANCELLATION = 1e5


def hyp2f1_near_one(a, b, c, x):
    """``2F1(a, b; c; 1 - x)`` for ``x`` in [0, 1], with ``c - a - b`` not an integer.

    For ``1 - x <= 1/2`` the Gauss series is summed directly. Otherwise the
    connection formula to argument ``x`` is used; when its two terms cancel
    by more than five digits (large ``a``, ``b`` with ``x`` near 1/2) the
    direct series, still convergent there, is used instead.
    """
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    z = 1.0 - x
    if a == 0 or b == 0 or z == 0.0:
        return 1.0
    if x == 0.0:
        return hyp2f1_closed_at_one(a, b, c)
    if z <= 0.5:
        return _gauss_series(a, b, c, z)[0]

    cab = c - a - b
    if cab == math.floor(cab):
        raise DomainError("connection formula needs c - a - b non-integer")
    lg_c, sc = _log_gamma_signed(c)

    lg1, s1 = _log_gamma_signed(cab)
    lr_ca, s_ca = _log_rgamma_sign(c - a)
    lr_cb, s_cb = _log_rgamma_sign(c - b)
    f1, m1 = _gauss_series(a, b, 1.0 - cab, x)
    k1 = sc * s1 * s_ca * s_cb * math.exp(lg_c + lg1 + lr_ca + lr_cb) if s_ca * s_cb else 0.0

    lg2, s2 = _log_gamma_signed(-cab)
    lr_a, s_a = _log_rgamma_sign(a)
    lr_b, s_b = _log_rgamma_sign(b)
    if s_a * s_b:
        f2, m2 = _gauss_series(c - a, c - b, cab + 1.0, x)
        k2 = sc * s2 * s_a * s_b * math.exp(lg_c + lg2 + lr_a + lr_b + cab * math.log(x))
    else:
        f2, m2, k2 = 0.0, 0.0, 0.0

    value = k1 * f1 + k2 * f2
    spread = abs(k1) * m1 + abs(k2) * m2
    if value != 0.0 and spread <= _MAX_CANCELLATION * abs(value):
        return value
    return _gauss_series(a, b, c, z)[0]


def density_s2(p, x):
    """Density of ``s**2`` at ``x`` in (0, 1)."""
    x = float(x)
    if not 0.0 < x < 1.0:
        raise DomainError(f"density is defined on (0, 1), got x={x}")
    a, b, c = p.hyp_params
    power = 0.5 * p.r * (p.n - p.r) - 1.0
    log_f = log_normalization_constant(p) - 0.5 * math.log(x) + power * math.log1p(-x)
    return math.exp(log_f) * hyp2f1_near_one(a, b, c, x)


def density_s2_cdf(p, x):
    """``P[s**2 <= x]`` by adaptive quadrature (substituting ``x = t**2``)."""
    from scipy.integrate import quad

    x = float(x)
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0

    def integrand(t):
        return 2.0 * t * density_s2(p, t * t) if 0.0 < t < 1.0 else 0.0

    value, _ = quad(integrand, 0.0, math.sqrt(x), epsabs=1e-12, epsrel=1e-10, limit=200)
    return min(max(value, 0.0), 1.0)


def density_s2_cdf_sorted(p, xs):
    """CDF at each point of the nondecreasing sequence ``xs``, integrating piecewise."""
    from scipy.integrate import quad

    def integrand(t):
        return 2.0 * t * density_s2(p, t * t) if 0.0 < t < 1.0 else 0.0

    out = np.empty(len(xs))
    total, prev = 0.0, 0.0
    for i, x in enumerate(xs):
        t = math.sqrt(min(max(float(x), 0.0), 1.0))
        if t > prev:
            piece, _ = quad(integrand, prev, t, epsabs=1e-13, epsrel=1e-10, limit=100)
            total += piece
            prev = t
        out[i] = min(max(total, 0.0), 1.0)
    return out


LEMMA_MIN_DIM = 30


def _check_large(r, n):
    if not (r > LEMMA_MIN_DIM and n - r > LEMMA_MIN_DIM):
        raise DomainError(
            f"the tail bound requires r > {LEMMA_MIN_DIM} and n - r > {LEMMA_MIN_DIM}, "
            f"got r={r}, n-r={n - r}"
        )


def _check_delta(delta):
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")


def tail_probability_bound(r, n, delta):
    """Upper bound on ``P[s <= delta / sqrt(r (n - r))]``, i.e. ``min(2.02 delta, 1)``."""
    _check_large(r, n)
    _check_delta(delta)
    return min(2.02 * delta, 1.0)


@dataclass(frozen=True)
class BoundSet:
    delta: float
    r: int
    n: int
    gap: Optional[float]
    b1: float
    b2: float
    b3: Optional[float]
    b4: float
    b4_applicable: bool

    @property
    def norm3_bound(self):
        """The bound that applies to ``|R11^-1 R12|``: the sharp one if its hypothesis holds."""
        return self.b4 if self.b4_applicable else self.b3

    def to_dict(self):
        return {
            "delta": self.delta, "r": self.r, "n": self.n, "gap": self.gap,
            "b1": self.b1, "b2": self.b2, "b3": self.b3, "b4": self.b4,
            "b4_applicable": self.b4_applicable,
        }


def theorem_bounds(r, n, delta, gap=None):
    """Bounds that hold jointly with probability ``1 - delta``.

    b1: sigma_r / sigma_min(R11)      b2: sigma_max(R22) / sigma_{r+1}
    b3: |R11^-1 R12|_2 for any gap    b4: sharper |R11^-1 R12|_2, needs a large gap
    """
    _check_large(r, n)
    _check_delta(delta)
    root = math.sqrt(r * (n - r))
    b1 = 2.02 / delta * root
    b4 = 4.04 / delta * root + 1.0
    b3 = None
    applicable = False
    if gap is not None:
        gap = float(gap)
        if not gap > 0:
            raise DomainError(f"gap must be positive, got {gap}")
        b3 = 6.1 * root / delta + 50.0 * root**3 / (gap * delta**3)
        applicable = delta > math.sqrt(2.0) * 1.01 * n / gap
    return BoundSet(delta, r, n, gap, b1, b1, b3, b4, applicable)


def deterministic_bounds(spectrum, r):
    """Always-valid ceilings ``(sigma_r/sigma_n, sigma_1/sigma_{r+1}, sigma_1/sigma_n)``.

    A zero ``sigma_n`` gives infinite first and third entries.
    """
    s = np.asarray(spectrum, dtype=np.float64)
    n = s.size
    if not 1 <= r < n:
        raise DomainError(f"split index must satisfy 1 <= r < {n}, got {r}")
    if np.any(s < 0) or np.any(np.diff(s) > 0):
        raise DomainError("spectrum must be nonnegative and nonincreasing")
    with np.errstate(divide="ignore"):
        d1 = s[r - 1] / s[-1] if s[-1] > 0 else math.inf
        d2 = s[0] / s[r] if s[r] > 0 else math.inf
        d3 = s[0] / s[-1] if s[-1] > 0 else math.inf
    return float(d1), float(d2), float(d3)
