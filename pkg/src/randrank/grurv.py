"""Randomized URV of a product ``A1^m1 @ ... @ Ak^mk`` (each ``mi`` is +1 or -1)
computed without forming the product or any inverse.

The last factor is handled by URV (``mk = +1``) or by ULV of its transpose
(``mk = -1``); the orthogonal factor is then pushed to the front through one
QR or RQ per remaining factor. The result satisfies
``M = u_current @ R1^m1 @ ... @ Rk^mk @ v`` with every ``Ri`` upper triangular.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .dense import EPS, as_matrix, householder_qr, rq_decompose, solve_upper_triangular
from .errors import SingularMatrixError, StructuralError
from .metrics import rank_reveal_metrics
from .rrr import RurvResult, rulv, rurv


@dataclass(frozen=True)
class FactorChain:
    factors: Tuple[Tuple[np.ndarray, int], ...]

    def __init__(self, factors):
        items = []
        for mat, exp in factors:
            mat = as_matrix(mat)
            if exp not in (1, -1):
                raise StructuralError(f"exponents must be +1 or -1, got {exp}")
            items.append((mat, int(exp)))
        if not items:
            raise StructuralError("a factor chain needs at least one matrix")
        n = items[0][0].shape[0]
        for i, (mat, _) in enumerate(items):
            if mat.shape != (n, n):
                raise StructuralError(f"factor {i} has shape {mat.shape}, expected ({n}, {n})")
        object.__setattr__(self, "factors", tuple(items))

    @property
    def n(self):
        return self.factors[0][0].shape[0]

    @property
    def exponents(self):
        return tuple(e for _, e in self.factors)

    def __len__(self):
        return len(self.factors)


@dataclass
class GrurvResult:
    u_current: np.ndarray
    v: np.ndarray
    r_list: List[np.ndarray]
    exponents: Tuple[int, ...]


def _check_invertible(tri, index):
    """Reject a triangular factor that is certainly numerically singular.

    For triangular R, sigma_min <= min|r_ii| and sigma_max >= max|r_ii|, so a
    diagonal ratio below n*eps proves sigma_min <= n*eps*sigma_max.
    """
    d = np.abs(np.diag(tri))
    if d.min() <= tri.shape[0] * EPS * d.max():
        raise SingularMatrixError(
            f"factor {index} is numerically singular (min|r_ii| = {d.min():.3e}, "
            f"max|r_ii| = {d.max():.3e})",
            index=index,
        )


def grurv(chain, rng):
    if not isinstance(chain, FactorChain):
        chain = FactorChain(chain)
    mats = [m for m, _ in chain.factors]
    exps = chain.exponents
    k = len(chain)
    r_list = [None] * k

    if exps[-1] == 1:
        u, r_list[-1], v = rurv(mats[-1], rng)
    else:
        u, low, v = rulv(mats[-1].T, rng)
        r_list[-1] = np.ascontiguousarray(low.T)
        _check_invertible(r_list[-1], k - 1)
    u_current = u

    for i in range(k - 2, -1, -1):
        if exps[i] == 1:
            u, r_list[i] = householder_qr(mats[i] @ u_current)
            u_current = u
        else:
            r_list[i], u = rq_decompose(u_current.T @ mats[i])
            _check_invertible(r_list[i], i)
            u_current = np.ascontiguousarray(u.T)

    return GrurvResult(u_current, v, r_list, exps)


def assemble_r(result):
    """``R1^m1 @ ... @ Rk^mk``, built right to left with back substitution for inverses."""
    acc = None
    for i in range(len(result.r_list) - 1, -1, -1):
        tri, exp = result.r_list[i], result.exponents[i]
        try:
            if exp == 1:
                acc = tri.copy() if acc is None else tri @ acc
            else:
                rhs = np.eye(tri.shape[0]) if acc is None else acc
                acc = solve_upper_triangular(tri, rhs)
        except SingularMatrixError as exc:
            raise SingularMatrixError(f"factor {i}: {exc}", index=i) from exc
    return np.triu(acc)


def as_rurv(result):
    """View a product factorization as a single URV triple."""
    return RurvResult(result.u_current, assemble_r(result), result.v)


def implicit_rank_metrics(result, sigma, r, trial_index=0):
    return rank_reveal_metrics(sigma, as_rurv(result), r, trial_index=trial_index)
