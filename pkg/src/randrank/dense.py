"""Dense real kernels: Householder QR and its QL/RQ twins, back substitution,
one-sided Jacobi singular values and a power-iteration 2-norm.

Matrices are plain ``numpy.ndarray`` objects of dtype float64 in C (row-major)
order. Every routine returns fresh arrays and never mutates its arguments.
"""

from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, InputError, SingularMatrixError, StructuralError

EPS = np.finfo(np.float64).eps

# Diagonal entries below this are treated as exactly singular.
TINY_PIVOT = 1e-300


class QrFactors(NamedTuple):
    q: np.ndarray
    r: np.ndarray


class QlFactors(NamedTuple):
    q: np.ndarray
    l: np.ndarray  # noqa: E741


class RqFactors(NamedTuple):
    r: np.ndarray
    q: np.ndarray


def as_matrix(a, name="a"):
    """Return ``a`` as a finite, C-contiguous float64 2-D array (always a copy)."""
    arr = np.array(a, dtype=np.float64, order="C", copy=True)
    if arr.ndim != 2:
        raise StructuralError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains NaN or Inf")
    return arr


def _require_square(a, name="a"):
    if a.shape[0] != a.shape[1]:
        raise StructuralError(f"{name} must be square, got {a.shape}")


def gemm(a, b):
    """Matrix product with an explicit conformity check."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise StructuralError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def transpose(a):
    return np.ascontiguousarray(np.asarray(a, dtype=np.float64).T)


def householder_qr(a):
    """Full Householder QR, ``a = q @ r`` with ``q`` square orthogonal.

    The strict lower part of ``r`` is written as exact zeros and the signs
    are normalized so that ``diag(r) >= 0``. With that convention the
    orthogonal factor of a Gaussian matrix is Haar distributed.
    """
    r = as_matrix(a)
    m, n = r.shape
    if m < n or n < 1:
        raise StructuralError(f"householder_qr needs rows >= cols >= 1, got {r.shape}")

    reflectors = []
    for k in range(min(m - 1, n)):
        x = r[k:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            reflectors.append(None)
            continue
        v = x.copy()
        v[0] += np.copysign(alpha, x[0])
        beta = 2.0 / np.dot(v, v)
        block = r[k:, k:]
        block -= np.outer(v, beta * (v @ block))
        reflectors.append((v, beta))

    # Backward accumulation touches only the trailing (m-k) x (m-k) block.
    q = np.eye(m)
    for k in range(len(reflectors) - 1, -1, -1):
        h = reflectors[k]
        if h is None:
            continue
        v, beta = h
        block = q[k:, k:]
        block -= np.outer(v, beta * (v @ block))

    r = np.triu(r)
    signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    r[: len(signs)] *= signs[:, None]
    q[:, : len(signs)] *= signs[None, :]
    return QrFactors(q, r)


def ql_decompose(a):
    """``a = q @ l`` with ``l`` lower triangular, via QR of the 180-degree rotation of ``a``."""
    a = as_matrix(a)
    _require_square(a)
    qt, rt = householder_qr(a[::-1, ::-1])
    q = np.ascontiguousarray(qt[::-1, ::-1])
    l = np.ascontiguousarray(rt[::-1, ::-1])  # noqa: E741
    return QlFactors(q, np.tril(l))


def rq_decompose(a):
    """``a = r @ q`` with ``r`` upper triangular; transpose of the QL of ``a.T``."""
    a = as_matrix(a)
    _require_square(a)
    q, l = ql_decompose(a.T)  # noqa: E741
    return RqFactors(np.triu(transpose(l)), transpose(q))


def solve_upper_triangular(r, b):
    """Back substitution for ``r @ x = b``; all right-hand sides at once, no pivoting."""
    r = as_matrix(r, "r")
    b = np.asarray(b, dtype=np.float64)
    vector = b.ndim == 1
    b = as_matrix(b[:, None] if vector else b, "b")
    n = r.shape[0]
    _require_square(r, "r")
    if b.shape[0] != n:
        raise StructuralError(f"rhs has {b.shape[0]} rows, triangular factor has {n}")
    diag = np.diag(r)
    bad = np.flatnonzero(np.abs(diag) < TINY_PIVOT)
    if bad.size:
        i = int(bad[0])
        raise SingularMatrixError(f"zero pivot r[{i},{i}] = {diag[i]!r}", index=i)

    x = np.empty_like(b)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - r[i, i + 1 :] @ x[i + 1 :]) / diag[i]
    return x[:, 0] if vector else x


def _round_robin(m):
    """Pairings for one sweep of the parallel (tournament) Jacobi ordering.

    Yields ``m - 1`` rounds; each round is a pair of index arrays whose
    pairs are disjoint and together cover every column once.
    """
    players = list(range(m))
    for _ in range(m - 1):
        half = m // 2
        top = np.array(players[:half])
        bottom = np.array(players[half:][::-1])
        yield np.minimum(top, bottom), np.maximum(top, bottom)
        players = [players[0], players[-1]] + players[1:-1]


def jacobi_svd_values(a, tol=1e-15, max_sweeps=30):
    """Singular values of ``a`` (rows >= cols) by one-sided Jacobi, descending.

    Columns are orthogonalized pairwise until every pair satisfies
    ``|x.y| <= tol * |x| |y|``. The plain floating-point dot product of two
    exactly orthogonal length-m columns has rounding noise of order
    ``sqrt(m) * eps``, so ``tol`` is raised to that floor when the caller's
    value is below it.
    """
    a = as_matrix(a)
    m, n = a.shape
    if m < n:
        raise StructuralError(f"jacobi_svd_values needs rows >= cols, got {a.shape}")
    tol = max(tol, np.sqrt(m) * EPS)

    # Rows of w are the columns of a; pad to an even count with a zero row,
    # which never rotates since its inner products vanish.
    w = a.T.copy()
    if n % 2:
        w = np.vstack([w, np.zeros((1, m))])
    rounds = list(_round_robin(w.shape[0]))

    off = np.inf
    for _ in range(max_sweeps):
        off = 0.0
        rotated = False
        for p, q in rounds:
            x, y = w[p], w[q]
            alpha = np.einsum("ij,ij->i", x, x)
            beta = np.einsum("ij,ij->i", y, y)
            gamma = np.einsum("ij,ij->i", x, y)
            scale = np.sqrt(alpha * beta)
            with np.errstate(divide="ignore", invalid="ignore"):
                cosine = np.where(scale > 0.0, np.abs(gamma) / scale, 0.0)
            off = max(off, float(cosine.max()))
            act = cosine > tol
            if not act.any():
                continue
            rotated = True
            p, q = p[act], q[act]
            x, y = x[act], y[act]
            zeta = (beta[act] - alpha[act]) / (2.0 * gamma[act])
            t = np.sign(zeta) / (np.abs(zeta) + np.hypot(1.0, zeta))
            t[zeta == 0.0] = 1.0
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            w[p] = c[:, None] * x - s[:, None] * y
            w[q] = s[:, None] * x + c[:, None] * y
        if not rotated:
            values = np.linalg.norm(w[:n], axis=1)
            return np.sort(values)[::-1]
    raise ConvergenceError(
        f"one-sided Jacobi did not converge in {max_sweeps} sweeps (off = {off:.3e})",
        measure=off,
    )


_START_SEED = 0x5EED


def spectral_norm(a, rtol=1e-12, max_iter=10_000):
    """Largest singular value by power iteration on ``a.T @ a`` (never formed)."""
    a = as_matrix(a)
    if not np.any(a):
        return 0.0
    x = np.random.Generator(np.random.Philox(_START_SEED)).standard_normal(a.shape[1])
    x /= np.linalg.norm(x)
    sigma = 0.0
    for _ in range(max_iter):
        y = a @ x
        new = float(np.linalg.norm(y))
        z = a.T @ y
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return new
        x = z / nz
        if abs(new - sigma) <= rtol * new:
            return new
        sigma = new
    return sigma
