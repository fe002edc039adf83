"""Bounded one-dimensional minimization without derivatives.

Golden-section search combined with successive parabolic interpolation,
following Brent's method.  Used for the acceleration-parameter searches,
which are smooth and unimodal on the windows we pass in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import OptimizationError

__all__ = ["MinimizeResult", "minimize_scalar"]

_GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class MinimizeResult:
    x: float
    fun: float
    evaluations: int
    converged: bool


def minimize_scalar(f, lo, hi, xtol=1e-10, max_evals=200):
    """Minimize f on the closed interval [lo, hi].

    Parameters
    ----------
    f : callable
        Real-valued function of one real variable.
    lo, hi : float
        Interval endpoints, lo < hi.
    xtol : float
        Absolute convergence tolerance on the argument.
    max_evals : int
        Evaluation budget; exceeding it returns the best point found with
        converged=False.

    Returns
    -------
    MinimizeResult
    """
    if not lo < hi:
        raise OptimizationError(f"empty interval [{lo}, {hi}]")
    if not xtol > 0.0:
        raise OptimizationError(f"xtol must be positive, got {xtol}")

    evals = 0

    def call(t):
        nonlocal evals
        evals += 1
        val = f(t)
        if not math.isfinite(val):
            raise OptimizationError(f"non-finite value {val!r} at x={t!r}")
        return val

    # state: x best, w second best, v previous w
    a, b = float(lo), float(hi)
    x = w = v = a + _GOLDEN * (b - a)
    fx = fw = fv = call(x)
    d = e = 0.0

    while evals < max_evals:
        mid = 0.5 * (a + b)
        tol1 = xtol + 1e-15 * abs(x)
        tol2 = 2.0 * tol1
        if abs(x - mid) <= tol2 - 0.5 * (b - a):
            return MinimizeResult(x, fx, evals, True)

        use_golden = True
        if abs(e) > tol1:
            # fit a parabola through (v, fv), (w, fw), (x, fx)
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            e_prev, e = e, d
            if abs(p) < abs(0.5 * q * e_prev) and q * (a - x) < p < q * (b - x):
                d = p / q
                u = x + d
                if (u - a) < tol2 or (b - u) < tol2:
                    d = math.copysign(tol1, mid - x)
                use_golden = False
        if use_golden:
            e = (b if x < mid else a) - x
            d = _GOLDEN * e

        u = x + (d if abs(d) >= tol1 else math.copysign(tol1, d))
        fu = call(u)

        if fu <= fx:
            if u < x:
                b = x
            else:
                a = x
            v, fv = w, fw
            w, fw = x, fx
            x, fx = u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv = w, fw
                w, fw = u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu

    return MinimizeResult(x, fx, evals, False)
