"""Plain-text matrix files: a ``rows cols`` header, then row-major decimal values."""

import numpy as np

from .dense import as_matrix
from .errors import InputError


def read_matrix(path):
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise InputError(f"{path}: missing 'rows cols' header")
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
        values = np.array([float(t) for t in tokens[2:]])
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if rows < 1 or cols < 1 or values.size != rows * cols:
        raise InputError(f"{path}: header says {rows}x{cols} but found {values.size} values")
    return as_matrix(values.reshape(rows, cols))


def write_matrix(path, a):
    a = np.asarray(a, dtype=np.float64)
    with open(path, "w") as fh:
        fh.write(f"{a.shape[0]} {a.shape[1]}\n")
        for row in a:
            fh.write(" ".join(format(x, ".17g") for x in row) + "\n")
