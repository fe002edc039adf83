"""Shared plumbing of the iterative solvers.

A ShiftedSystem is the matrix form (z M + S) w = g of one transformed
equation; all solvers consume it.  The residual convention throughout is
the M-paired vector

    rr_n = g - (z M + S) w_n      (written r-bold in the derivations),

whose V-space counterpart is r_n = M^{-1} rr_n; inner products of the
operator A_z = z I + M^{-1} S never need an M-inverse because
(A_z v, w) = z <M v, w> + <S v, w>.

StoppingRule covers the three ways a run can stop:

  * error mode (a direct-solve reference is supplied): stop when
    ||w_n - ref||_M <= tolerance, the criterion used for table runs;
  * absolute mode (spectral interval + mass floor supplied): stop when
    ||rr_n||_2 / (sqrt(lambda_1(M)) * dist(-z, [lo, hi])) <= tolerance,
    a computable upper bound for ||e_n||_M, stricter than the true
    error by the factor sqrt(lambda_1(M)) and the spectral gap;
  * relative mode (fallback): ||rr_n||_2 <= tolerance * ||g||_2.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatchError
from .linalg import SpdFactor

__all__ = [
    "ShiftedSystem",
    "StoppingRule",
    "IterationReport",
    "spectrum_distance",
    "Stopwatch",
]


def spectrum_distance(z: complex, lo: float, hi: float) -> float:
    """min over lambda in [lo, hi] of |z + lambda|."""
    if not lo <= hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    return abs(z + min(max(-z.real, lo), hi))


class ShiftedSystem:
    """(z M + S) w = g with a cached factorization of M.

    ``mass`` may be a 1-D array, interpreted as a lumped diagonal mass;
    the M-solve then degenerates to a division.
    """

    def __init__(
        self,
        mass: Union[sp.spmatrix, np.ndarray],
        stiffness: sp.spmatrix,
        z: complex,
        g: np.ndarray,
    ):
        n = stiffness.shape[0]
        self.lumped = isinstance(mass, np.ndarray) and mass.ndim == 1
        if (self.lumped and mass.shape != (n,)) or (
            not self.lumped and mass.shape != (n, n)
        ):
            raise DimensionMismatchError(
                f"mass of shape {mass.shape} does not match stiffness {stiffness.shape}"
            )
        if np.shape(g) != (n,):
            raise DimensionMismatchError(
                f"right-hand side of shape {np.shape(g)} does not match N={n}"
            )
        self.mass = mass
        self.stiffness = stiffness
        self.z = complex(z)
        self.g = np.asarray(g, dtype=complex)
        self.n = n
        self._mass_factor: Optional[SpdFactor] = None

    def apply_mass(self, v: np.ndarray) -> np.ndarray:
        return self.mass * v if self.lumped else self.mass @ v

    def mass_solve(self, v: np.ndarray) -> np.ndarray:
        if self.lumped:
            return v / self.mass
        if self._mass_factor is None:
            self._mass_factor = SpdFactor(self.mass)
        return self._mass_factor.solve(v)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """(z M + S) v, the matrix the right-hand side g is paired with."""
        return self.z * self.apply_mass(v) + self.stiffness @ v

    def residual(self, w: np.ndarray) -> np.ndarray:
        """M-paired residual g - (z M + S) w."""
        return self.g - self.matvec(w)

    def az_inner(self, v: np.ndarray, w: np.ndarray) -> complex:
        """(A_z v, w) = z <M v, w> + <S v, w>; no M-inverse involved."""
        return complex(
            self.z * np.vdot(w, self.apply_mass(v)) + np.vdot(w, self.stiffness @ v)
        )

    def m_inner(self, v: np.ndarray, w: np.ndarray) -> complex:
        return complex(np.vdot(w, self.apply_mass(v)))

    def m_norm(self, v: np.ndarray) -> float:
        return float(np.sqrt(max(np.real(np.vdot(v, self.apply_mass(v))), 0.0)))


@dataclass(frozen=True)
class StoppingRule:
    """When to declare an iterate good enough; see the module docstring."""

    tolerance: float
    max_iterations: int = 1000
    reference: Optional[np.ndarray] = None
    interval: Optional[Tuple[float, float]] = None
    mass_floor: Optional[float] = None

    def __post_init__(self):
        if self.tolerance <= 0.0:
            raise ValueError(f"need tolerance > 0, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError(f"need max_iterations >= 1, got {self.max_iterations}")

    @property
    def mode(self) -> str:
        if self.reference is not None:
            return "error"
        if self.interval is not None and self.mass_floor is not None:
            return "absolute"
        return "relative"

    def measure(
        self,
        system: ShiftedSystem,
        w: np.ndarray,
        rr: np.ndarray,
        z_eff: Optional[complex] = None,
        interval_eff: Optional[Tuple[float, float]] = None,
    ) -> float:
        """The quantity compared against the tolerance.

        ``z_eff``/``interval_eff`` let a solver that iterates a
        transformed operator (shifted-inverse CG) supply the shift and
        spectral interval of what it actually iterates; ``rr`` is that
        operator's M-paired residual.
        """
        mode = self.mode
        if mode == "error":
            return system.m_norm(w - self.reference)
        if mode == "absolute":
            lo, hi = interval_eff if interval_eff is not None else self.interval
            dist = spectrum_distance(z_eff if z_eff is not None else system.z, lo, hi)
            return float(np.linalg.norm(rr) / (np.sqrt(self.mass_floor) * dist))
        scale = float(np.linalg.norm(system.g))
        return float(np.linalg.norm(rr) / scale) if scale > 0.0 else float(
            np.linalg.norm(rr)
        )

    def target(self) -> float:
        return self.tolerance


@dataclass(frozen=True)
class IterationReport:
    """Outcome of one iterative solve.

    ``history`` holds the stopping measure at steps 0..iterations, so
    its length is always iterations + 1.
    """

    iterations: int
    converged: bool
    history: np.ndarray
    solution: np.ndarray
    mode: str
    tolerance: float
    seconds: float

    @property
    def final_measure(self) -> float:
        return float(self.history[-1])


class Stopwatch:
    def __init__(self):
        self._t0 = time.perf_counter()

    def seconds(self) -> float:
        return time.perf_counter() - self._t0
