"""Randomized URV and ULV factorizations.

Both right-multiply the input by the transpose of a Haar matrix ``v`` and
then triangularize: ``a = u @ r @ v`` (URV) or ``a = u @ l @ v`` (ULV).
"""

from typing import NamedTuple

import numpy as np

from .dense import as_matrix, householder_qr, ql_decompose
from .errors import StructuralError
from .randhaar import sample_haar_orthogonal


class RurvResult(NamedTuple):
    u: np.ndarray
    r: np.ndarray
    v: np.ndarray


class RulvResult(NamedTuple):
    u: np.ndarray
    l: np.ndarray  # noqa: E741
    v: np.ndarray


def _haar_for(a, rng, v):
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise StructuralError(f"expected a square matrix, got {a.shape}")
    if v is None:
        v = sample_haar_orthogonal(a.shape[0], rng)
    else:
        v = as_matrix(v, "v")
        if v.shape != a.shape:
            raise StructuralError(f"v has shape {v.shape}, a has {a.shape}")
    return a, v


def rurv(a, rng, v=None):
    """Randomized URV: sample Haar ``v``, then QR of ``a @ v.T``.

    Passing ``v`` skips the sampling step; the tests use it to pin the
    mixing matrix (e.g. to the identity).
    """
    a, v = _haar_for(a, rng, v)
    u, r = householder_qr(a @ v.T)
    return RurvResult(u, r, v)


def rulv(a, rng, v=None):
    """Randomized ULV: as :func:`rurv` with a QL in place of the QR."""
    a, v = _haar_for(a, rng, v)
    u, l = ql_decompose(a @ v.T)  # noqa: E741
    return RulvResult(u, l, v)


def split_r(result, r):
    """Blocks ``(R11, R12, R22)`` of the triangular factor at split index ``r``."""
    mat = result.r if hasattr(result, "r") else np.asarray(result)
    n = mat.shape[0]
    if not 1 <= r < n:
        raise StructuralError(f"split index must satisfy 1 <= r < {n}, got {r}")
    return mat[:r, :r].copy(), mat[:r, r:].copy(), mat[r:, r:].copy()
