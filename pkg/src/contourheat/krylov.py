"""Conjugate gradients for the complex-shifted systems (z M + S) w = g.

The operator A_z = z I + A (A = M^{-1} S, self-adjoint in the M inner
product) is normal but not Hermitian, so the classical CG coefficients
change: alpha_n = ||r_n||^2 / (A_z p_n, p_n) stays, but

    beta_n = -(r_{n+1}, A_z p_n) / (A_z p_n, p_n)

replaces the residual-norm ratio (to which it reduces for real z).  The
short recurrence survives because (A_z p_n, p_k) = 0 for k < n; the
error in the norm |||v|||^2 = |z| ||v||^2 + (A v, v) then obeys the
Chebyshev-type bound

    |||e_n||| <= sec(phi/2) / |T_n(s_z)| * |||e_0|||,   phi = arg z,

with T_n evaluated stably through eta_z (chebyshev_prediction).

Shifted-inverse preconditioning transforms the equation to
(ztilde I + B) w = ztilde B g with B = (mu I + A)^{-1} and
ztilde = 1/(z - mu): the same algorithm applies with A replaced by B,
whose spectrum [1/(mu+lambda_N), 1/(mu+lambda_1)] is uniformly bounded,
and the shift mu has a closed-form optimum (optimal_mu_cg).

For a preconditioner that does not commute with A the short recurrence
is lost; cg_general_precond keeps the searches of the current cycle,
restoring direction conjugacy through a lower-triangular system for the
beta coefficients, and restarts every ``restart`` steps.  Following the
derivation it never applies M^{-1}: the preconditioner acts on the
M-paired residual directly (B_z v = Bmat (M v), so r_tilde = Bmat rr).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .errors import IterationBreakdownError
from .linalg import SpdFactor
from .system import IterationReport, ShiftedSystem, StoppingRule, Stopwatch

__all__ = [
    "ChebyshevPrediction",
    "chebyshev_prediction",
    "chebyshev_prediction_inv",
    "eta_tilde",
    "optimal_mu_cg",
    "triple_norm",
    "cg_shifted",
    "cg_inv_precond",
    "cg_general_precond",
]

_RECOMPUTE_EVERY = 50


@dataclass(frozen=True)
class ChebyshevPrediction:
    """Per-step factor |eta_z| and the bound sec(phi/2)/|T_n(s_z)|."""

    s: complex
    eta: complex
    factor: float
    sec_half_phi: float
    bounds: np.ndarray

    def bound(self, n: int) -> float:
        return float(self.bounds[n])


def chebyshev_prediction(
    lam1: float, lam_n: float, z: complex, n_max: int = 50
) -> ChebyshevPrediction:
    """Convergence prediction for CG on a spectrum z + [lambda_1, lambda_N].

    eta_z = -(sqrt(lam_N+z) - sqrt(lam1+z)) / (sum of the roots) with
    principal square roots; |T_n(s_z)| = |eta^n + eta^{-n}|/2 evaluated
    through the |eta| < 1 root so nothing overflows.
    """
    if lam1 >= lam_n:
        raise ValueError(
            f"need lambda_1 < lambda_N, got {lam1}, {lam_n}; a one-point "
            "spectrum converges in a single step"
        )
    z = complex(z)
    sa = cmath.sqrt(lam_n + z)
    sb = cmath.sqrt(lam1 + z)
    eta = -(sa - sb) / (sa + sb)
    s = -(lam1 + lam_n + 2.0 * z) / (lam_n - lam1)
    sec = 1.0 / math.cos(cmath.phase(z) / 2.0)
    n = np.arange(n_max + 1)
    powers = eta ** (2 * n)
    tn = 0.5 * np.abs(1.0 + powers) * abs(eta) ** (-n.astype(float))
    return ChebyshevPrediction(
        s=s, eta=eta, factor=abs(eta), sec_half_phi=sec, bounds=sec / tn
    )


def _transformed(lam1: float, lam_n: float, z: complex, mu: float):
    """(lambda_1, lambda_N, shift) of the shifted-inverse transformation."""
    if mu <= -lam1:
        raise ValueError(f"need mu > -lambda_1 = {-lam1}, got mu={mu}")
    zt = 1.0 / (z - mu)
    return 1.0 / (mu + lam_n), 1.0 / (mu + lam1), zt


def chebyshev_prediction_inv(
    lam1: float, lam_n: float, z: complex, mu: float, n_max: int = 50
) -> ChebyshevPrediction:
    """Prediction for the transformed equation (ztilde I + B) w = ...."""
    if z == mu:
        raise ValueError("z = mu is solved exactly in one step; no prediction")
    l1, ln, zt = _transformed(lam1, lam_n, complex(z), mu)
    return chebyshev_prediction(l1, ln, zt, n_max)


def eta_tilde(lam1: float, lam_n: float, z: complex, mu: float) -> complex:
    """Per-step factor of shifted-inverse CG; zero when z equals mu."""
    z = complex(z)
    if abs(z - mu) <= 1e-14 * max(abs(z), abs(mu)):
        return 0.0 + 0.0j
    l1, ln, zt = _transformed(lam1, lam_n, z, mu)
    sa = cmath.sqrt(ln + zt)
    sb = cmath.sqrt(l1 + zt)
    return -(sa - sb) / (sa + sb)


def optimal_mu_cg(lam1: float, lam_n: float, z: complex) -> Tuple[float, float]:
    """Closed-form shift minimizing |eta_tilde| and the minimum itself.

    With q = |(z+lambda_1)/(z+lambda_N)| the optimum is
    mu = -lambda_1 + q (lambda_N - lambda_1)/(1 - q), tending to
    |z+lambda_1| - lambda_1 as lambda_N grows.
    """
    z = complex(z)
    num, den = abs(z + lam1), abs(z + lam_n)
    if not num < den:
        raise ValueError(
            f"need |z+lambda_1| < |z+lambda_N|, got {num} >= {den}"
        )
    q = num / den
    mu = -lam1 + q * (lam_n - lam1) / (1.0 - q)
    return float(mu), abs(eta_tilde(lam1, lam_n, z, mu))


def triple_norm(system: ShiftedSystem, v: np.ndarray) -> float:
    """|||v||| = sqrt(|z| <M v, v> + <S v, v>), the CG analysis norm."""
    mv = np.real(np.vdot(v, system.apply_mass(v)))
    sv = np.real(np.vdot(v, system.stiffness @ v))
    return float(np.sqrt(max(abs(system.z) * mv + sv, 0.0)))


def _start(system: ShiftedSystem, w0: Optional[np.ndarray]) -> np.ndarray:
    if w0 is None:
        return np.zeros(system.n, dtype=complex)
    return np.asarray(w0, dtype=complex).copy()


def _report(stop, history, w, n, converged, watch) -> IterationReport:
    return IterationReport(
        iterations=n,
        converged=converged,
        history=np.array(history),
        solution=w,
        mode=stop.mode,
        tolerance=stop.tolerance,
        seconds=watch.seconds(),
    )


def cg_shifted(
    system: ShiftedSystem,
    w0: Optional[np.ndarray] = None,
    stop: Optional[StoppingRule] = None,
    callback: Optional[Callable[[np.ndarray], None]] = None,
) -> IterationReport:
    """Three-term CG on (z M + S) w = g; one M-solve per iteration."""
    if stop is None:
        raise ValueError("a StoppingRule is required")
    watch = Stopwatch()
    w = _start(system, w0)
    rr = system.residual(w)
    r = system.mass_solve(rr)
    p = r.copy()
    history = [stop.measure(system, w, rr)]
    converged = history[0] <= stop.tolerance
    n = 0
    while not converged and n < stop.max_iterations:
        azp = system.matvec(p)
        denom = complex(np.vdot(p, azp))
        rnorm2 = float(np.real(np.vdot(r, rr)))
        if denom == 0.0:
            if rnorm2 > 0.0:
                raise IterationBreakdownError(
                    f"(A_z p, p) vanished at step {n} with residual {rnorm2:.3e}"
                )
            break
        alpha = rnorm2 / denom
        w = w + alpha * p
        n += 1
        if n % _RECOMPUTE_EVERY == 0:
            rr = system.residual(w)
        else:
            rr = rr - alpha * azp
        r = system.mass_solve(rr)
        beta = -complex(np.vdot(azp, r)) / denom
        p = r + beta * p
        if callback is not None:
            callback(w)
        history.append(stop.measure(system, w, rr))
        converged = history[-1] <= stop.tolerance
    return _report(stop, history, w, n, converged, watch)


def cg_inv_precond(
    system: ShiftedSystem,
    mu: float,
    w0: Optional[np.ndarray] = None,
    stop: Optional[StoppingRule] = None,
    shifted_solve: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    callback: Optional[Callable[[np.ndarray], None]] = None,
) -> IterationReport:
    """CG on the transformed equation (ztilde I + B) w = ztilde B g.

    B = (mu I + A)^{-1} is realized by a factorization of mu M + S (one
    solve per iteration; pass ``shifted_solve`` to reuse an existing
    one).  No M-solves are needed: the transformed residual lives in V
    directly.
    """
    if stop is None:
        raise ValueError("a StoppingRule is required")
    z, mass = system.z, system.apply_mass
    watch = Stopwatch()
    if shifted_solve is None:
        if system.lumped:
            shifted = sp.diags(mu * system.mass) + system.stiffness
        else:
            shifted = mu * system.mass + system.stiffness
        shifted_solve = SpdFactor(shifted.tocsc()).solve
    if abs(z - mu) <= 1e-12 * max(1.0, abs(z)):
        # z = mu collapses the transformed equation to w = (mu M + S)^{-1} g,
        # one factorization solve (eta_tilde = 0: convergence in one step).
        w = _start(system, w0)
        history = [stop.measure(system, w, system.residual(w))]
        w = shifted_solve(system.g)
        if callback is not None:
            callback(w)
        history.append(stop.measure(system, w, system.residual(w)))
        return _report(stop, history, w, 1, history[-1] <= stop.tolerance, watch)
    zt = 1.0 / (z - mu)

    def op(v: np.ndarray) -> np.ndarray:
        return zt * v + shifted_solve(mass(v))

    interval_eff = None
    if stop.interval is not None:
        lo, hi = stop.interval
        interval_eff = (1.0 / (mu + hi), 1.0 / (mu + lo))

    def measure(w, rt):
        return stop.measure(system, w, mass(rt), z_eff=zt, interval_eff=interval_eff)

    w = _start(system, w0)
    rt = zt * shifted_solve(system.g) - op(w)
    p = rt.copy()
    history = [measure(w, rt)]
    converged = history[0] <= stop.tolerance
    n = 0
    while not converged and n < stop.max_iterations:
        ap = op(p)
        map_ = mass(ap)
        denom = complex(np.vdot(p, map_))
        rnorm2 = float(np.real(np.vdot(rt, mass(rt))))
        if denom == 0.0:
            if rnorm2 > 0.0:
                raise IterationBreakdownError(
                    f"(op p, p) vanished at step {n} with residual {rnorm2:.3e}"
                )
            break
        alpha = rnorm2 / denom
        w = w + alpha * p
        n += 1
        if n % _RECOMPUTE_EVERY == 0:
            rt = zt * shifted_solve(system.g) - op(w)
        else:
            rt = rt - alpha * ap
        beta = -complex(np.vdot(map_, rt)) / denom
        p = rt + beta * p
        if callback is not None:
            callback(w)
        history.append(measure(w, rt))
        converged = history[-1] <= stop.tolerance
    return _report(stop, history, w, n, converged, watch)


def cg_general_precond(
    system: ShiftedSystem,
    apply_bz: Callable[[np.ndarray], np.ndarray],
    w0: Optional[np.ndarray] = None,
    stop: Optional[StoppingRule] = None,
    restart: int = 50,
    callback: Optional[Callable[[np.ndarray], None]] = None,
) -> IterationReport:
    """Preconditioned CG with full orthogonalization per restart cycle.

    ``apply_bz`` receives the M-paired residual rr = g - (z M + S) w and
    must return Bmat rr (the V-space preconditioned residual).  Within a
    cycle all searches p_0..p_n and their images A_z p_k are kept, and
    the new direction p_{n+1} = r_tilde_{n+1} + sum_k beta_k p_k solves

        sum_{k<=j} (A_z p_k, p_j) beta_k = -(A_z r_tilde_{n+1}, p_j),

    a lower-triangular system handled by forward substitution.
    """
    if stop is None:
        raise ValueError("a StoppingRule is required")
    if restart < 1:
        raise ValueError(f"need restart >= 1, got {restart}")
    watch = Stopwatch()
    w = _start(system, w0)
    rr = system.residual(w)
    rt = apply_bz(rr)
    history = [stop.measure(system, w, rr)]
    converged = history[0] <= stop.tolerance

    p_hist = np.zeros((restart, system.n), dtype=complex)
    azp_hist = np.zeros((restart, system.n), dtype=complex)
    lower = np.zeros((restart, restart), dtype=complex)
    m = 0
    p_hist[0] = rt
    n = 0
    while not converged and n < stop.max_iterations:
        p = p_hist[m]
        azp = system.matvec(p)
        azp_hist[m] = azp
        # Row m of the Gram matrix (A_z p_k, p_m), k <= m.
        lower[m, : m + 1] = azp_hist[: m + 1] @ np.conj(p)
        denom = lower[m, m]
        if denom == 0.0:
            if np.linalg.norm(rr) > 0.0:
                raise IterationBreakdownError(
                    f"(A_z p, p) vanished at step {n} of cycle position {m}"
                )
            break
        alpha = complex(np.vdot(rt, rr)) / denom
        w = w + alpha * p
        n += 1
        if n % _RECOMPUTE_EVERY == 0:
            rr = system.residual(w)
        else:
            rr = rr - alpha * azp
        rt = apply_bz(rr)
        if callback is not None:
            callback(w)
        history.append(stop.measure(system, w, rr))
        converged = history[-1] <= stop.tolerance
        if converged:
            break
        m += 1
        if m == restart:
            m = 0
            p_hist[0] = rt
            continue
        azrt = system.matvec(rt)
        rhs = -(np.conj(p_hist[:m]) @ azrt)
        betas = np.zeros(m, dtype=complex)
        for j in range(m):
            betas[j] = (rhs[j] - lower[j, :j] @ betas[:j]) / lower[j, j]
        p_hist[m] = rt + betas @ p_hist[:m]
    return _report(stop, history, w, n, converged, watch)
