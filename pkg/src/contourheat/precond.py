"""SPD preconditioners for the shifted matrices mu M + S.

Each builder returns a Preconditioner whose ``apply`` maps an M-paired
residual vector to a V-space correction, i.e. the matrix Bmat in
B_z v = Bmat (M v).  All three are real symmetric positive definite:

  * inv     exact factorization of mu M + S (B = (mu I + A)^{-1});
  * ic0     incomplete Cholesky with zero fill on the pattern of
            mu M + S (no threshold dropping, deterministic);
  * sgs(k)  k steps of the symmetric Gauss-Seidel iteration for
            (mu M + S) x = v started from zero; one step is the
            classical (D+U)^{-1} D (D+L)^{-1}.

Spectral metadata (m, M bounds of B(mu M + S), the norm of B_z M, the
positivity constant gamma) is expensive and context-dependent, so the
builders leave it unset; spectral.spectral_bounds fills it in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import FactorizationError
from .fem import FemSpace
from .linalg import SpdFactor

__all__ = [
    "Preconditioner",
    "make_inv",
    "make_ic0",
    "make_sgs",
    "PrecondCache",
]

_IC_SHIFTS = (0.0, 1e-3, 1e-2, 1e-1)


@dataclass
class Preconditioner:
    """A symmetric positive definite action plus optional spectral data.

    ``m``/``big_m`` bound the spectrum of B (mu M + S), ``norm_b`` is
    the M-norm of B_z, ``gamma`` the positivity constant of the sharper
    Richardson estimate, ``rho`` the one-step contraction of the
    iteration an sgs(k) action is built from.
    """

    tag: str
    mu: float
    apply: Callable[[np.ndarray], np.ndarray]
    m: Optional[float] = None
    big_m: Optional[float] = None
    norm_b: Optional[float] = None
    gamma: Optional[float] = None
    rho: Optional[float] = None

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.apply(v)


def _shifted_matrix(space: FemSpace, mu: float) -> sp.csr_matrix:
    return (mu * space.mass + space.stiffness).tocsr()


def make_inv(
    space: FemSpace, mu: float, lam1: Optional[float] = None
) -> Preconditioner:
    """Exact shifted inverse; apply(v) solves (mu M + S) x = v.

    m = M = 1 exactly; the operator norm of B_z is 1/(lam1 + mu) when
    the smallest pencil eigenvalue is supplied.
    """
    factor = SpdFactor(_shifted_matrix(space, mu).tocsc())
    return Preconditioner(
        tag="inv",
        mu=mu,
        apply=factor.solve,
        m=1.0,
        big_m=1.0,
        norm_b=None if lam1 is None else 1.0 / (lam1 + mu),
    )


class _TriangularFactor:
    """Forward/backward solves with one lower-triangular sparse factor."""

    def __init__(self, lower: sp.csc_matrix):
        # Natural ordering and a zero pivot threshold keep SuperLU from
        # permuting an already triangular matrix.
        self._lu = spla.splu(
            lower.tocsc(), permc_spec="NATURAL", diag_pivot_thresh=0.0
        )

    def _solve(self, v: np.ndarray, trans: str) -> np.ndarray:
        if np.iscomplexobj(v):
            return self._lu.solve(v.real, trans=trans) + 1j * self._lu.solve(
                v.imag, trans=trans
            )
        return self._lu.solve(v, trans=trans)

    def lower(self, v: np.ndarray) -> np.ndarray:
        return self._solve(v, "N")

    def upper(self, v: np.ndarray) -> np.ndarray:
        return self._solve(v, "T")


def _ic0_values(target: sp.csr_matrix) -> sp.csr_matrix:
    """Zero-fill incomplete Cholesky of an SPD matrix.

    Returns the lower-triangular factor L with L L^T matching the
    target on its own sparsity pattern.  Raises FactorizationError on a
    non-positive pivot.
    """
    lower = sp.tril(target, k=0, format="csr")
    lower.sort_indices()
    indptr, indices = lower.indptr, lower.indices
    data = lower.data
    val = np.zeros_like(data)
    diag_pos = indptr[1:] - 1  # sorted rows of a lower triangle end at j = i
    n = target.shape[0]
    for i in range(n):
        start, end = indptr[i], indptr[i + 1]
        if end == start or indices[end - 1] != i:
            raise FactorizationError(f"missing diagonal entry in row {i}")
        for idx in range(start, end):
            j = indices[idx]
            # Dot the computed parts of rows i and j (columns < j).
            acc = 0.0
            pi, pj = start, indptr[j]
            stop_j = diag_pos[j] if j < i else idx
            while pi < idx and pj < stop_j:
                ci, cj = indices[pi], indices[pj]
                if ci == cj:
                    acc += val[pi] * val[pj]
                    pi += 1
                    pj += 1
                elif ci < cj:
                    pi += 1
                else:
                    pj += 1
            if j < i:
                val[idx] = (data[idx] - acc) / val[diag_pos[j]]
            else:
                pivot = data[idx] - acc
                if pivot <= 0.0:
                    raise FactorizationError(
                        f"non-positive pivot {pivot:.3e} in row {i}"
                    )
                val[idx] = math.sqrt(pivot)
    return sp.csr_matrix((val, indices.copy(), indptr.copy()), shape=target.shape)


def make_ic0(space: FemSpace, mu: float) -> Preconditioner:
    """Incomplete Cholesky with zero fill on the pattern of mu M + S.

    A non-positive pivot triggers retries with the diagonal inflated by
    1e-3, 1e-2, 1e-1 of itself before giving up.
    """
    target = _shifted_matrix(space, mu)
    last = None
    for shift in _IC_SHIFTS:
        try:
            shifted = target if shift == 0.0 else (
                target + sp.diags(shift * target.diagonal())
            ).tocsr()
            factor = _TriangularFactor(sp.csc_matrix(_ic0_values(shifted)))
            break
        except FactorizationError as exc:
            last = exc
    else:
        raise FactorizationError(
            f"incomplete Cholesky failed at all diagonal shifts: {last}"
        )

    def apply(v: np.ndarray) -> np.ndarray:
        return factor.upper(factor.lower(v))

    return Preconditioner(tag="ic0", mu=mu, apply=apply)


def make_sgs(space: FemSpace, mu: float, k: int = 1) -> Preconditioner:
    """k steps of symmetric Gauss-Seidel for (mu M + S) x = v from zero."""
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    target = _shifted_matrix(space, mu)
    diag = target.diagonal()
    if np.any(diag == 0.0):
        raise FactorizationError("zero diagonal entry; Gauss-Seidel undefined")
    factor = _TriangularFactor(sp.tril(target, k=0, format="csc"))

    def one_step(v: np.ndarray) -> np.ndarray:
        return factor.upper(diag * factor.lower(v))

    if k == 1:
        apply = one_step
    else:

        def apply(v: np.ndarray) -> np.ndarray:
            x = one_step(v)
            for _ in range(k - 1):
                x = x + one_step(v - target @ x)
            return x

    return Preconditioner(tag=f"sgs({k})", mu=mu, apply=apply)


@dataclass
class PrecondCache:
    """Builds preconditioners on demand, keyed by kind and rounded mu.

    Successive quadrature points often optimize to nearby shifts; the
    6-digit rounding collapses duplicates without conflating distinct
    shifts.
    """

    space: FemSpace
    lam1: Optional[float] = None
    _store: Dict[Tuple[str, float, int], Preconditioner] = field(
        default_factory=dict, repr=False
    )

    def get(self, kind: str, mu: float, k: int = 1) -> Preconditioner:
        key = (kind, round(float(mu), 6), k)
        found = self._store.get(key)
        if found is None:
            if kind == "inv":
                found = make_inv(self.space, mu, lam1=self.lam1)
            elif kind == "ic0":
                found = make_ic0(self.space, mu)
            elif kind == "sgs":
                found = make_sgs(self.space, mu, k)
            else:
                raise ValueError(f"unknown preconditioner kind {kind!r}")
            self._store[key] = found
        return found
