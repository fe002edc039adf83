"""Weighted inner products, sparse SPD factorizations, and a dense direct solver.

All iterative methods in this package work in the geometry induced by an SPD
weight matrix (usually the mass matrix).  The inner product convention is

    inner(u, v) = sum_i u_i * conj(v_i),

linear in the first argument, so that (v, w)_W = inner(W @ v, w) never needs
the inverse of W.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import lu_factor, lu_solve

from .errors import DimensionMismatchError, SingularMatrixError

__all__ = [
    "inner",
    "weighted_inner",
    "weighted_norm",
    "SpdFactor",
    "DenseLu",
    "dense_solve",
]


def inner(u, v):
    """<u, v> = sum u_i conj(v_i); linear in u, antilinear in v."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"shapes {u.shape} and {v.shape}")
    return np.vdot(v, u)


def weighted_inner(weight, u, v):
    """(u, v)_W = <W u, v> for an SPD weight matrix W.

    Parameters
    ----------
    weight : sparse or dense matrix, or None for the identity.
    u, v : array_like
        Vectors of matching length; complex allowed.
    """
    if weight is None:
        return inner(u, v)
    return inner(weight @ u, v)


def weighted_norm(weight, v):
    """sqrt(Re (v, v)_W).  The real part guards roundoff for Hermitian W."""
    val = weighted_inner(weight, v, v)
    return float(np.sqrt(max(val.real, 0.0)))


class SpdFactor:
    """Cached sparse factorization of a real SPD matrix.

    Solves with complex right-hand sides are done on the real and imaginary
    parts separately so the factorization itself stays real.
    """

    def __init__(self, matrix):
        matrix = sp.csc_matrix(matrix)
        if matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchError(f"matrix shape {matrix.shape}")
        self.shape = matrix.shape
        if np.iscomplexobj(matrix):
            raise ValueError("SpdFactor expects a real matrix")
        self._lu = spla.splu(matrix)

    def solve(self, b):
        b = np.asarray(b)
        if b.shape[0] != self.shape[0]:
            raise DimensionMismatchError(f"rhs length {b.shape[0]} vs {self.shape[0]}")
        if np.iscomplexobj(b):
            return self._lu.solve(b.real.copy()) + 1j * self._lu.solve(b.imag.copy())
        return self._lu.solve(b)

    __call__ = solve


class DenseLu:
    """Dense LU with partial pivoting; the direct-solver reference at desk scale."""

    def __init__(self, matrix):
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchError(f"matrix shape {matrix.shape}")
        self.shape = matrix.shape
        self._scale = max(np.abs(matrix).max(), 1.0)
        self._lu, self._piv = lu_factor(matrix, check_finite=False)
        diag = np.abs(np.diag(self._lu))
        bad = np.where(diag <= 1e-14 * self._scale)[0]
        if bad.size:
            raise SingularMatrixError(bad[0], np.diag(self._lu)[bad[0]])

    def solve(self, b):
        b = np.asarray(b)
        if b.shape[0] != self.shape[0]:
            raise DimensionMismatchError(f"rhs length {b.shape[0]} vs {self.shape[0]}")
        return lu_solve((self._lu, self._piv), b, check_finite=False)

    __call__ = solve


def dense_solve(matrix, rhs):
    """One-shot dense solve via DenseLu."""
    return DenseLu(matrix).solve(rhs)
