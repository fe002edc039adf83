"""Richardson iteration with optimal complex acceleration.

For w^{n+1} = w^n + alpha B r^n the error contracts like the maximum of
|1 - alpha s| over the spectrum s of the preconditioned operator, which
for every case handled here fills a straight segment [a, b] in the right
half-plane:

  * no preconditioner: s = z + lambda, lambda in [lambda_1, lambda_N];
  * shifted inverse B = (mu I + A)^{-1}: s = (z+lambda)/(mu+lambda),
    a segment from (z+lambda_1)/(mu+lambda_1) towards 1;
  * a general SPD preconditioner: the contraction is controlled by the
    spectral-equivalence data (m_z, M_z, ||B_z||, gamma_z) instead of a
    segment, through the nu maximization of plan_general_precond.

optimal_alpha_segment solves min_alpha max(|1-alpha a|, |1-alpha b|) in
closed form: with c = (a+b)/2 and d = i(b-a), the optimum alpha is
1/(c + s d) for a real root s of a quadratic, and the two endpoint
moduli are equal there.  Segments proportional to a real direction
(Im(a conj(b)) = 0, e.g. z real) degenerate and fall back to the
classical alpha = 2/(a+b) rotated by the common phase.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .brent import minimize_scalar
from .errors import OptimizationError
from .system import IterationReport, ShiftedSystem, StoppingRule, Stopwatch

__all__ = [
    "SegmentAlpha",
    "RichardsonPlan",
    "optimal_alpha_segment",
    "optimal_alpha_point",
    "plan_basic",
    "plan_inv_precond",
    "optimize_mu_richardson",
    "plan_general_precond",
    "plan_general_zero_shift",
    "run_richardson",
]

_J_MARGIN = 1e-9


@dataclass(frozen=True)
class SegmentAlpha:
    """Solution of min_alpha max_{s in [a,b]} |1 - alpha s|.

    f1, f2, s_min are the intermediate quantities of the nondegenerate
    closed form and are None on the degenerate (real-proportional) and
    point branches.
    """

    a: complex
    b: complex
    alpha: complex
    epsilon: float
    f1: Optional[float] = None
    f2: Optional[float] = None
    s_min: Optional[float] = None

    @property
    def rho(self) -> float:
        return abs(self.alpha)

    @property
    def phi(self) -> float:
        return -cmath.phase(self.alpha)


@dataclass(frozen=True)
class RichardsonPlan:
    """Acceleration parameter alpha = rho e^{-i phi} plus its prediction.

    ``predicted`` is the guaranteed per-step error reduction factor in
    the norm natural to the variant (M-norm without preconditioner,
    (mu M + S)-norm for the shifted inverse, the B_z^{-1}-weighted norm
    for a general preconditioner).
    """

    variant: str
    alpha: complex
    predicted: float
    mu: Optional[float] = None
    segment: Optional[SegmentAlpha] = None

    @property
    def rho(self) -> float:
        return abs(self.alpha)

    @property
    def phi(self) -> float:
        return -cmath.phase(self.alpha)


def optimal_alpha_point(a: complex) -> SegmentAlpha:
    """Trivial path for a one-point spectrum: alpha = 1/a, no error left."""
    if a == 0:
        raise ValueError("spectrum point a=0 admits no finite alpha")
    return SegmentAlpha(a=a, b=a, alpha=1.0 / a, epsilon=0.0)


def optimal_alpha_segment(a: complex, b: complex) -> SegmentAlpha:
    """Optimal alpha for a spectrum filling the segment [a, b], a != b."""
    a, b = complex(a), complex(b)
    if a == b:
        raise ValueError("segment endpoints coincide; use optimal_alpha_point")
    c = (a + b) / 2.0
    d = 1j * (b - a)

    # Re(a conj(d)) = Im(a conj(b)): zero means the segment direction is
    # real-proportional to a (z real), where the quadratic degenerates.
    re_ad = (a * d.conjugate()).real
    if abs(re_ad) <= 1e-14 * abs(a) * abs(d):
        phase = cmath.phase(a)
        ra, rb = (a * cmath.exp(-1j * phase)).real, (b * cmath.exp(-1j * phase)).real
        if ra <= 0.0 or rb <= 0.0:
            raise ValueError(
                f"rotated segment [{ra:.3e}, {rb:.3e}] is not in the right half-plane"
            )
        alpha = cmath.exp(-1j * phase) * 2.0 / (ra + rb)
        eps = abs(rb - ra) / (ra + rb)
        return SegmentAlpha(a=a, b=b, alpha=alpha, epsilon=eps)

    f1 = (2.0 * (a * c.conjugate()).real - abs(a) ** 2) / (2.0 * re_ad)
    f2 = (2.0 * f1 * (c * d.conjugate()).real - abs(c) ** 2) / abs(d) ** 2
    disc = f1 * f1 - f2
    if disc < 0.0:
        raise OptimizationError(
            f"negative discriminant {disc:.3e} for segment [{a}, {b}]"
        )
    s_min = -f1 + math.copysign(math.sqrt(disc), re_ad)
    alpha = 1.0 / (c + s_min * d)
    eps = abs(1.0 - alpha * a)
    return SegmentAlpha(a=a, b=b, alpha=alpha, epsilon=eps, f1=f1, f2=f2, s_min=s_min)


def plan_basic(lam1: float, lam_n: float, z: complex) -> RichardsonPlan:
    """Unpreconditioned plan: spectrum segment [z+lambda_1, z+lambda_N]."""
    if lam1 <= 0.0 or lam_n < lam1:
        raise ValueError(f"need 0 < lambda_1 <= lambda_N, got {lam1}, {lam_n}")
    if lam_n == lam1:
        seg = optimal_alpha_point(z + lam1)
    else:
        seg = optimal_alpha_segment(z + lam1, z + lam_n)
    return RichardsonPlan(
        variant="basic", alpha=seg.alpha, predicted=seg.epsilon, segment=seg
    )


def _g_endpoints(lam1: float, lam_n: float, z: complex, mu: float):
    """Endpoints of the segment traced by (z+lambda)/(mu+lambda).

    lam_n may be math.inf, in which case the far endpoint is the
    lambda -> infinity limit 1; the finite-lambda_N segment is contained
    in that one, so predictions stay valid upper bounds.
    """
    a = (z + lam1) / (mu + lam1)
    b = 1.0 + 0.0j if math.isinf(lam_n) else (z + lam_n) / (mu + lam_n)
    return a, b


def plan_inv_precond(
    lam1: float, lam_n: float, z: complex, mu: float
) -> RichardsonPlan:
    """Plan for B = (mu I + A)^{-1}; reduction is lambda_N-independent."""
    if lam1 <= 0.0 or lam_n < lam1:
        raise ValueError(f"need 0 < lambda_1 <= lambda_N, got {lam1}, {lam_n}")
    if mu <= -lam1:
        raise ValueError(f"need mu > -lambda_1 = {-lam1}, got mu={mu}")
    a, b = _g_endpoints(lam1, lam_n, z, mu)
    if abs(a - b) <= 1e-15 * max(abs(a), abs(b)):
        seg = optimal_alpha_point(a)
    else:
        seg = optimal_alpha_segment(a, b)
    return RichardsonPlan(
        variant="inv", alpha=seg.alpha, predicted=seg.epsilon, mu=float(mu), segment=seg
    )


def optimize_mu_richardson(lam1: float, lam_n: float, z: complex) -> float:
    """Shift mu minimizing the predicted reduction of plan_inv_precond.

    Searches (-lambda_1, 10|z| + 10 lambda_1] with a coarse grid
    followed by local refinement; pass lam_n = math.inf to optimize the
    lambda_N-independent bound (the far endpoint replaced by its limit
    1), which is how the mu values of the printed tables arise.
    """
    z = complex(z)
    if z.imag == 0.0 and z.real > -lam1:
        # G is a real segment; mu = z collapses it to the point 1.
        return float(z.real)

    lo = -lam1 + 1e-9 * max(1.0, lam1)
    hi = 10.0 * abs(z) + 10.0 * lam1

    def objective(mu: float) -> float:
        return plan_inv_precond(lam1, lam_n, z, mu).predicted

    grid = np.linspace(lo, hi, 201)
    values = [objective(mu) for mu in grid]
    i = int(np.argmin(values))
    left = grid[max(i - 1, 0)]
    right = grid[min(i + 1, len(grid) - 1)]
    if left == right:
        raise OptimizationError("degenerate search window for mu")
    result = minimize_scalar(objective, float(left), float(right), xtol=1e-10)
    if not result.converged:
        raise OptimizationError(
            f"mu search did not converge after {result.evaluations} evaluations"
        )
    return float(result.x)


def _breve_lambda(lam: float, gamma: float, zhat_abs: float) -> float:
    return lam - 2.0 * gamma / zhat_abs


def plan_general_precond(
    m: float,
    big_m: float,
    lam: float,
    zeta: float,
    gamma: Optional[float] = None,
    zhat_abs: Optional[float] = None,
) -> RichardsonPlan:
    """Plan from spectral-equivalence data of a general preconditioner.

    Inputs: m <= M with m (B_z^{-1} v, v) <= ((mu I + A) v, v) <=
    M (B_z^{-1} v, v), lam = |z - mu| * ||B_z||, zeta = arg(z - mu) in
    (pi/2, pi).  Maximizes

        nu(phi) = m cos^2(phi) cos(zeta - phi)
                  / (M cos(zeta - phi) + lam cos(phi))

    over phi in (zeta - pi/2, pi/2); the per-step factor is
    sqrt(1 - nu).  When a residual-compatibility constant gamma >= 0 is
    known (with |z - mu| passed as zhat_abs), lam is reduced to
    lam - 2 gamma / |z - mu| and the denominator becomes the maximum of
    its two terms, which can only improve the factor.
    """
    if not m <= big_m:
        raise ValueError(f"need m <= M, got m={m}, M={big_m}")
    if m <= 0.0:
        raise ValueError(f"need m > 0, got {m}")
    if lam <= 0.0:
        raise ValueError(f"need lam > 0, got {lam}")
    if not math.pi / 2.0 < zeta < math.pi:
        raise ValueError(
            f"need zeta in (pi/2, pi), got {zeta}; use plan_general_zero_shift "
            "for the z = mu limit"
        )
    if gamma is not None:
        if gamma < 0.0:
            raise ValueError(f"need gamma >= 0, got {gamma}")
        if zhat_abs is None or zhat_abs <= 0.0:
            raise ValueError("gamma requires the shift magnitude zhat_abs > 0")

    lo = zeta - math.pi / 2.0 + _J_MARGIN
    hi = math.pi / 2.0 - _J_MARGIN
    if lo >= hi:
        raise OptimizationError(f"empty phase interval for zeta={zeta}")

    breve = gamma is not None
    lam_eff = _breve_lambda(lam, gamma, zhat_abs) if breve else lam

    def nu(phi: float) -> float:
        cc = math.cos(zeta - phi)
        cp = math.cos(phi)
        num = m * cp * cp * cc
        if breve:
            den = max(big_m * cc, lam_eff * cp)
        else:
            den = big_m * cc + lam_eff * cp
        return num / den

    result = minimize_scalar(lambda phi: -nu(phi), lo, hi, xtol=1e-12)
    if not result.converged:
        raise OptimizationError("phase maximization did not converge")
    phi = result.x
    value = -result.fun
    if not 0.0 < value <= 1.0 + 1e-12:
        raise OptimizationError(f"nu={value} outside (0, 1] at phi={phi}")
    rho = value / (m * math.cos(phi))
    alpha = rho * cmath.exp(-1j * phi)
    return RichardsonPlan(
        variant="general-breve" if breve else "general",
        alpha=alpha,
        predicted=math.sqrt(max(1.0 - value, 0.0)),
    )


def plan_general_zero_shift(m: float, big_m: float) -> RichardsonPlan:
    """z -> 0, mu -> 0 limit: real alpha = 1/M, factor sqrt(1 - m/M)."""
    if not 0.0 < m <= big_m:
        raise ValueError(f"need 0 < m <= M, got m={m}, M={big_m}")
    return RichardsonPlan(
        variant="general",
        alpha=1.0 / big_m,
        predicted=math.sqrt(max(1.0 - m / big_m, 0.0)),
    )


def run_richardson(
    system: ShiftedSystem,
    plan: RichardsonPlan,
    precond=None,
    w0: Optional[np.ndarray] = None,
    stop: Optional[StoppingRule] = None,
) -> IterationReport:
    """Iterate w += alpha * B rr with rr the M-paired residual.

    Without a preconditioner B is M^{-1} (the plain operator iteration);
    otherwise ``precond`` is called on rr.  Ten consecutive steps of
    measure growth end the run with converged=False.
    """
    if stop is None:
        raise ValueError("a StoppingRule is required")
    watch = Stopwatch()
    apply_b = precond if precond is not None else system.mass_solve
    w = np.zeros(system.n, dtype=complex) if w0 is None else np.asarray(
        w0, dtype=complex
    ).copy()
    rr = system.residual(w)
    history = [stop.measure(system, w, rr)]
    converged = history[0] <= stop.tolerance
    growth = 0
    n = 0
    while not converged and n < stop.max_iterations:
        w = w + plan.alpha * apply_b(rr)
        rr = system.residual(w)
        n += 1
        history.append(stop.measure(system, w, rr))
        if history[-1] <= stop.tolerance:
            converged = True
        elif history[-1] > history[-2]:
            growth += 1
            if growth >= 10:
                break
        else:
            growth = 0
    return IterationReport(
        iterations=n,
        converged=converged,
        history=np.array(history),
        solution=w,
        mode=stop.mode,
        tolerance=stop.tolerance,
        seconds=watch.seconds(),
    )
