"""Seeded Gaussian and Haar-orthogonal sampling.

``SeededRng`` wraps numpy's counter-based Philox bit generator. A stream is
addressed by ``(seed, *stream)``: trial ``t`` of grid point ``g`` uses
``SeededRng(seed, (g, t))`` no matter which worker runs it or in which order.
"""

import numpy as np

from .dense import householder_qr, jacobi_svd_values


class SeededRng:
    """Reproducible uniform stream keyed by a 64-bit seed and a stream path."""

    def __init__(self, seed, stream=()):
        self.seed = int(seed)
        self.stream = tuple(int(s) for s in stream)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def __repr__(self):
        return f"SeededRng(seed={self.seed}, stream={self.stream})"

    def child(self, *index):
        """Independent stream one level below this one."""
        return SeededRng(self.seed, self.stream + index)

    def uniform_open(self, size):
        """Uniforms on (0, 1); exact zeros are redrawn."""
        u = self._gen.random(size)
        zero = u == 0.0
        while zero.any():
            u[zero] = self._gen.random(int(zero.sum()))
            zero = u == 0.0
        return u

    def standard_normal(self, size):
        """Paired Box-Muller transform of the uniform stream."""
        size = int(size)
        pairs = (size + 1) // 2
        u1 = self.uniform_open(pairs)
        u2 = self._gen.random(pairs)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        z = np.empty(2 * pairs)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        return z[:size]


def sample_gaussian_matrix(n, m, rng):
    if n < 1 or m < 1:
        raise ValueError(f"dimensions must be positive, got {n}x{m}")
    return rng.standard_normal(n * m).reshape(n, m)


def sample_haar_orthogonal(n, rng):
    """Haar-distributed ``n x n`` orthogonal matrix: the sign-fixed Q of a Gaussian matrix."""
    q, _ = householder_qr(sample_gaussian_matrix(n, n, rng))
    return q


def sample_corner_smin(n, r, rng):
    """Smallest singular value of the leading ``r x r`` block of a fresh Haar matrix."""
    if not 1 <= r < n:
        raise ValueError(f"need 1 <= r < n, got r={r}, n={n}")
    v = sample_haar_orthogonal(n, rng)
    return float(jacobi_svd_values(v[:r, :r])[-1])
