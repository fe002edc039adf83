"""The model initial-boundary-value problem on the trapezium.

    u_t - a * div grad u = f   in the trapezium, a = 1/15,
    u = 0                      on the boundary,
    u(0) = X,

manufactured so that the exact solution is u(x, y, t) = X(x, y) * T(t)
with X = (1+x)(1-x-y) sin(pi y) and T(t) = (1+2t) e^{-t}.

After a Laplace transform in time the problem turns into the family of
stationary equations (z I + A) w(z) = g(z) with

    g(z) = u(0) + f^(z) = X * (1 + LT{T'}(z)) - a lap(X) * LT{T}(z),

where LT{T}(z) = 1/(z+1) + 2/(z+1)^2 and LT{T'}(z) = z LT{T}(z) - T(0).
This module provides the analytic ingredients and the discrete load
vector g built from them.
"""

from __future__ import annotations

import numpy as np

from .fem import FemSpace, interpolate, load_vector

__all__ = [
    "DIFFUSIVITY",
    "spatial_factor",
    "spatial_factor_laplacian",
    "temporal_factor",
    "lt_temporal",
    "lt_temporal_derivative",
    "model_load_vector",
    "exact_nodal_solution",
    "initial_nodal_values",
]

DIFFUSIVITY = 1.0 / 15.0


def spatial_factor(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """X(x, y) = (1+x)(1-x-y) sin(pi y); vanishes on the boundary."""
    return (1.0 + x) * (1.0 - x - y) * np.sin(np.pi * y)


def spatial_factor_laplacian(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """lap X, computed analytically."""
    s, c = np.sin(np.pi * y), np.cos(np.pi * y)
    return (
        -2.0 * s
        - 2.0 * np.pi * (1.0 + x) * c
        - np.pi**2 * (1.0 + x) * (1.0 - x - y) * s
    )


def temporal_factor(t: float) -> float:
    """T(t) = (1 + 2t) e^{-t}."""
    return (1.0 + 2.0 * t) * np.exp(-t)


def _check_shift(z: complex) -> complex:
    z = complex(z)
    if abs(z + 1.0) <= 1e-8:
        raise ValueError(
            f"shift z={z} is at (or too close to) the transform pole z=-1"
        )
    return z


def lt_temporal(z: complex) -> complex:
    """Laplace transform of T: 1/(z+1) + 2/(z+1)^2."""
    z = _check_shift(z)
    return 1.0 / (z + 1.0) + 2.0 / (z + 1.0) ** 2


def lt_temporal_derivative(z: complex) -> complex:
    """Laplace transform of T': z LT{T}(z) - T(0)."""
    z = _check_shift(z)
    return z * lt_temporal(z) - 1.0


def model_load_vector(space: FemSpace, z: complex) -> np.ndarray:
    """Load vector g with entries (g(z), Phi_i) at the interior nodes."""
    z = _check_shift(z)
    lt = lt_temporal(z)
    lt_d = lt_temporal_derivative(z)
    a = space.a

    def g(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return spatial_factor(x, y) * (1.0 + lt_d) - a * spatial_factor_laplacian(
            x, y
        ) * lt

    return load_vector(g, space)


def exact_nodal_solution(space: FemSpace, t: float) -> np.ndarray:
    """u(P_i, t) = X(P_i) T(t) at the interior nodes."""
    if t < 0.0:
        raise ValueError(f"need t >= 0, got t={t}")
    return interpolate(spatial_factor, space) * temporal_factor(t)


def initial_nodal_values(space: FemSpace) -> np.ndarray:
    """u(P_i, 0) = X(P_i)."""
    return interpolate(spatial_factor, space)
