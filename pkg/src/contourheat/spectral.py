"""Extremal generalized eigenvalues of SPD pencils by Lanczos.

Acceleration parameters and error predictions need a handful of
spectral quantities:

  * lambda_1, lambda_N of the pencil (S, M) (operator A = M^{-1} S),
  * the equivalence constants m_z, M_z with
        m_z (B_z^{-1} v, v) <= ((mu I + A) v, v) <= M_z (B_z^{-1} v, v),
  * the operator norm ||B_z|| in the M geometry,
  * lambda_1 of the Hermitian pencil (F_z, M) controlling the residual
    cross term of a non-commuting preconditioner.

All pencils here are self-adjoint with respect to a known SPD weight, so
plain Lanczos with full reorthogonalization in that inner product is
enough at desk scale; the smallest eigenvalue of (S, M) is obtained by
shift-invert (Lanczos on S^{-1} M, whose largest eigenvalue is its
reciprocal).  F_z is indefinite and is handled by a dense eigensolve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import OptimizationError
from .fem import FemSpace
from .linalg import SpdFactor

__all__ = [
    "EigenEstimate",
    "SpectralBounds",
    "lanczos_extremes",
    "lambda_max",
    "lambda_min",
    "pencil_extremes",
    "spectral_bounds",
    "lambda1_fz",
]

Action = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, sp.spmatrix]


@dataclass(frozen=True)
class EigenEstimate:
    """Extreme eigenvalue estimate with a Ritz residual.

    ``residual`` is ||op v - value * v|| over ||v|| in the weight norm
    for the Ritz pair of the operator that was actually iterated (for
    shift-inverted estimates it is rescaled to eigenvalue units), and
    ``converged`` means it dropped below tol relative to the value.
    """

    value: float
    residual: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class SpectralBounds:
    """Spectral-equivalence data of a preconditioner at shift parameter mu.

    ``lower``/``upper`` bound the spectrum of B_z (mu M + S) so that
    lower * (B_z^{-1} v, v) <= ((mu I + A) v, v) <= upper * (same);
    ``norm_b`` is the largest eigenvalue of B_z M in the M geometry.
    """

    lower: float
    upper: float
    norm_b: float
    estimates: Tuple[EigenEstimate, EigenEstimate, EigenEstimate]


def _as_action(op: Action) -> Callable[[np.ndarray], np.ndarray]:
    if callable(op):
        return op
    return lambda v: op @ v


def _tridiag_extremes(alphas, betas) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(alphas)
    b = np.asarray(betas)
    if a.size == 1:
        return a.copy(), np.ones((1, 1))
    return sla.eigh_tridiagonal(a, b[: a.size - 1])


def lanczos_extremes(
    op: Action,
    weight: Action,
    n: int,
    tol: float = 1e-8,
    max_steps: int = 200,
    seed: int = 0,
    restarts: int = 2,
    start: Optional[np.ndarray] = None,
    which: str = "both",
) -> Tuple[EigenEstimate, EigenEstimate]:
    """Smallest and largest eigenvalue of a weight-self-adjoint operator.

    Lanczos in the weight inner product with full reorthogonalization;
    the per-end residual is the standard |beta_k y_end| bound.  Only the
    ends requested by ``which`` ("min", "max", "both") gate convergence,
    though both estimates are always returned.  If the Krylov space
    stalls before the requested ends meet tol, the iteration restarts
    from the worst requested Ritz vector, up to ``restarts`` times.
    """
    if tol <= 0.0:
        raise ValueError(f"need tol > 0, got {tol}")
    if which not in ("min", "max", "both"):
        raise ValueError(f"which must be 'min', 'max' or 'both', got {which!r}")
    apply_op = _as_action(op)
    apply_w = _as_action(weight)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) if start is None else np.asarray(start, dtype=float)

    total = 0
    for _ in range(restarts + 1):
        basis = np.zeros((max_steps + 1, n))
        wbasis = np.zeros((max_steps + 1, n))
        wv = apply_w(v)
        nrm = np.sqrt(wv @ v)
        if not nrm > 0.0:
            raise OptimizationError("start vector has zero weight norm")
        basis[0] = v / nrm
        wbasis[0] = wv / nrm
        alphas: list = []
        betas: list = []
        theta = y = None
        res_lo = res_hi = np.inf
        for k in range(max_steps):
            w = apply_op(basis[k])
            alphas.append(float(wbasis[k] @ w))
            w = w - alphas[-1] * basis[k]
            if k > 0:
                w = w - betas[-1] * basis[k - 1]
            # Full reorthogonalization, two passes.
            for _ in range(2):
                w = w - basis[: k + 1].T @ (wbasis[: k + 1] @ w)
            ww = apply_w(w)
            beta = float(np.sqrt(max(ww @ w, 0.0)))
            betas.append(beta)
            total += 1

            theta, y = _tridiag_extremes(alphas, betas)
            res_lo = beta * abs(y[-1, 0])
            res_hi = beta * abs(y[-1, -1])
            scale = max(abs(theta[0]), abs(theta[-1]), 1e-300)
            ok_lo = res_lo <= tol * scale or which == "max"
            ok_hi = res_hi <= tol * scale or which == "min"
            if (ok_lo and ok_hi) or beta <= 1e-14 * scale:
                lo = EigenEstimate(float(theta[0]), res_lo, total, True)
                hi = EigenEstimate(float(theta[-1]), res_hi, total, True)
                return lo, hi
            basis[k + 1] = w / beta
            wbasis[k + 1] = ww / beta

        # Restart from the Ritz vector of the worst requested end.
        scale = max(abs(theta[0]), abs(theta[-1]), 1e-300)
        if which == "min":
            worse = 0
        elif which == "max":
            worse = -1
        else:
            worse = 0 if res_lo / scale > res_hi / scale else -1
        v = basis[: len(alphas)].T @ y[:, worse]

    lo = EigenEstimate(float(theta[0]), res_lo, total, res_lo <= tol * scale)
    hi = EigenEstimate(float(theta[-1]), res_hi, total, res_hi <= tol * scale)
    return lo, hi


def lambda_max(
    apply_a: Action,
    apply_b: Action,
    solve_b: Action,
    n: int,
    tol: float = 1e-8,
    max_steps: int = 200,
    seed: int = 0,
) -> EigenEstimate:
    """Largest eigenvalue of the pencil A v = lambda B v (A, B SPD).

    Iterates B^{-1} A, which is self-adjoint in the B inner product.
    """
    a, bsolve = _as_action(apply_a), _as_action(solve_b)
    _, hi = lanczos_extremes(
        lambda v: bsolve(a(v)), apply_b, n, tol=tol, max_steps=max_steps, seed=seed,
        which="max",
    )
    return hi


def lambda_min(
    apply_b: Action,
    solve_a: Action,
    n: int,
    tol: float = 1e-8,
    max_steps: int = 200,
    seed: int = 0,
) -> EigenEstimate:
    """Smallest eigenvalue of A v = lambda B v by shift-invert.

    Iterates A^{-1} B (self-adjoint in the B inner product), whose
    largest eigenvalue is 1/lambda_min; small ends of SPD pencils are
    typically clustered, so this converges far faster than iterating
    B^{-1} A directly.
    """
    b, asolve = _as_action(apply_b), _as_action(solve_a)
    _, hi = lanczos_extremes(
        lambda v: asolve(b(v)), apply_b, n, tol=tol, max_steps=max_steps, seed=seed,
        which="max",
    )
    return EigenEstimate(
        value=1.0 / hi.value,
        residual=hi.residual / hi.value**2,
        iterations=hi.iterations,
        converged=hi.converged,
    )


def pencil_extremes(
    stiffness: sp.spmatrix,
    mass: Union[sp.spmatrix, np.ndarray],
    tol: float = 1e-8,
    max_steps: int = 200,
) -> Tuple[EigenEstimate, EigenEstimate]:
    """(lambda_1, lambda_N) of S v = lambda M v for SPD sparse S, M.

    M may be a 1-D array, interpreted as a lumped (diagonal) mass.
    """
    n = stiffness.shape[0]
    if isinstance(mass, np.ndarray) and mass.ndim == 1:
        apply_m = lambda v: mass * v
        solve_m = lambda v: v / mass
    else:
        apply_m = _as_action(mass)
        solve_m = SpdFactor(mass).solve
    lo = lambda_min(apply_m, SpdFactor(stiffness).solve, n, tol=tol, max_steps=max_steps)
    hi = lambda_max(_as_action(stiffness), apply_m, solve_m, n, tol=tol, max_steps=max_steps)
    return lo, hi


def spectral_bounds(
    apply_bz: Action,
    mu: float,
    space: FemSpace,
    tol: float = 1e-8,
    max_steps: int = 200,
) -> SpectralBounds:
    """Equivalence constants (m_z, M_z) and ||B_z|| of a preconditioner.

    B_z (mu M + S) is self-adjoint in the (mu M + S) inner product and
    its spectrum equals that of the preconditioned operator B_z
    (mu I + A) in the M geometry; B_z M is self-adjoint in the M inner
    product and its largest eigenvalue is ||B_z||.
    """
    bz = _as_action(apply_bz)
    shifted = (mu * space.mass + space.stiffness).tocsr()
    lo, hi = lanczos_extremes(
        lambda v: bz(shifted @ v), shifted, space.size, tol=tol, max_steps=max_steps
    )
    _, nb = lanczos_extremes(
        lambda v: bz(space.mass @ v), space.mass, space.size, tol=tol,
        max_steps=max_steps, which="max",
    )
    return SpectralBounds(
        lower=lo.value, upper=hi.value, norm_b=nb.value, estimates=(lo, hi, nb)
    )


def _dense_matrix(op: Action, n: int) -> np.ndarray:
    if isinstance(op, np.ndarray):
        return op
    if sp.issparse(op):
        return op.toarray()
    eye = np.eye(n)
    try:
        out = op(eye)
        if np.shape(out) == (n, n):
            return np.asarray(out)
    except Exception:
        pass
    cols = [np.asarray(op(eye[:, i])) for i in range(n)]
    return np.stack(cols, axis=1)


def lambda1_fz(
    apply_bz: Action,
    z: complex,
    mu: float,
    space: FemSpace,
) -> float:
    """Smallest eigenvalue of (F_z, M) for a shifted preconditioner B_z.

    With zhat = z - mu = xhat + i y (y taken >= 0 by conjugation) and
    dense B = B_z:

        H+  = mu M B M + (S B M + M B S) / 2      (symmetric),
        K   = S B M - M B S                        (antisymmetric),
        F_z = |xhat| H+ - (i y / 2) K              (Hermitian).

    Nonnegativity of lambda_1(F_z, M) is exactly the compatibility
    condition that lets the general error bound use gamma_z > 0.  Dense
    path only; guarded to N <= 5000.
    """
    n = space.size
    if n > 5000:
        raise ValueError(f"dense path is limited to N <= 5000, got N={n}")
    xhat = z.real - mu
    if xhat > 1e-12:
        raise ValueError(f"need Re z - mu <= 0, got {xhat}")
    y = abs(z.imag)
    b = _dense_matrix(apply_bz, n)
    m = space.mass.toarray()
    s = space.stiffness.toarray()
    bm = b @ m
    sbm = s @ bm
    mbs = sbm.T
    hplus = mu * (m @ bm) + 0.5 * (sbm + mbs)
    fz = abs(xhat) * hplus - (0.5j * y) * (sbm - mbs)
    vals = sla.eigh(fz, m, eigvals_only=True, subset_by_index=[0, 0])
    return float(vals[0])
