"""Hyperbolic contour quadrature for the inverse Laplace transform.

Time stepping is replaced by a quadrature rule along the left branch of
the hyperbola

    z(xi) = 1 - cosh(xi) + i sinh(xi),        xi in R,

with equally spaced parameters xi_j = j*k, |j| <= q, and step
k = ln(q)/q.  Given samples w(z_j) of a transformed solution, the
solution at time t is recovered by

    U(t) = (k / 2 pi i) * sum_j  exp(z_j t) w(z_j) z'(xi_j).

For real-valued data the transform obeys w(conj z) = conj w(z), so only
the nodes with j >= 0 need to be sampled; the negative half of the sum
is synthesized from conjugate symmetry.

The module also budgets per-node solver tolerances eps_j so that the
total quadrature perturbation stays below a prescribed delta.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import DimensionMismatchError

__all__ = [
    "ContourQuadrature",
    "ToleranceBudget",
    "build_quadrature",
    "inverse_transform",
    "solver_error_bound",
    "tolerance_budget",
    "write_quadrature_csv",
]


@dataclass(frozen=True)
class ContourQuadrature:
    """Node table of the hyperbola rule with 2q+1 nodes.

    Arrays are indexed by position p = j + q for j = -q..q, so position
    q holds the origin node z_0 = 0.
    """

    q: int
    k: float
    xi: np.ndarray
    nodes: np.ndarray
    dnodes: np.ndarray

    def index(self, j: int) -> int:
        """Array position of node j, valid for -q <= j <= q."""
        if not -self.q <= j <= self.q:
            raise IndexError(f"node index {j} outside [-{self.q}, {self.q}]")
        return j + self.q

    def node(self, j: int) -> complex:
        return complex(self.nodes[self.index(j)])

    def dnode(self, j: int) -> complex:
        return complex(self.dnodes[self.index(j)])

    @property
    def js(self) -> np.ndarray:
        return np.arange(-self.q, self.q + 1)


@dataclass(frozen=True)
class ToleranceBudget:
    """Per-node solver tolerances eps_j for a total error budget delta."""

    delta: float
    t: float
    eps: np.ndarray

    def tol(self, j: int, q: int) -> float:
        return float(self.eps[j + q])


def build_quadrature(q: int) -> ContourQuadrature:
    """Build the 2q+1 node hyperbola rule with step k = ln(q)/q.

    Nodes are z(xi_j) = 1 - cosh(xi_j) + i sinh(xi_j) and weights carry
    the parametrization derivative z'(xi_j) = -sinh(xi_j) + i cosh(xi_j).
    """
    if q < 1:
        raise ValueError(f"need q >= 1, got q={q}")
    k = np.log(q) / q
    js = np.arange(-q, q + 1)
    xi = js * k
    nodes = 1.0 - np.cosh(xi) + 1j * np.sinh(xi)
    dnodes = -np.sinh(xi) + 1j * np.cosh(xi)
    return ContourQuadrature(q=q, k=float(k), xi=xi, nodes=nodes, dnodes=dnodes)


Samples = Mapping[int, Union[complex, float, Sequence[complex], np.ndarray]]


def _collect_samples(samples: Samples, js: np.ndarray) -> np.ndarray:
    """Stack samples for the requested node indices into a 2-D array."""
    rows = []
    shape = None
    for j in js:
        try:
            w = samples[int(j)]
        except KeyError:
            raise DimensionMismatchError(
                f"missing transform sample for node j={j}"
            ) from None
        w = np.asarray(w, dtype=complex)
        if shape is None:
            shape = w.shape
        elif w.shape != shape:
            raise DimensionMismatchError(
                f"sample at j={j} has shape {w.shape}, expected {shape}"
            )
        rows.append(np.atleast_1d(w))
    return np.stack(rows)


def inverse_transform(
    samples: Samples,
    quad: ContourQuadrature,
    t: float,
    real_data: bool = True,
) -> np.ndarray:
    """Evaluate the contour sum U(t) = (k/2 pi i) sum_j e^{z_j t} w_j z'_j.

    With ``real_data`` the samples are required only for j = 0..q; the
    j < 0 half is synthesized from w(conj z) = conj w(z) and the result
    is returned as a real array after checking that the imaginary
    residue is below 1e-8 of the result norm.  With ``real_data=False``
    all 2q+1 samples must be present and the complex sum is returned.
    """
    if t <= 0.0:
        raise ValueError(f"need t > 0, got t={t}")
    q, k = quad.q, quad.k
    scalar_input = np.asarray(
        samples[0] if 0 in samples else next(iter(samples.values()))
    ).ndim == 0

    if real_data:
        js = np.arange(0, q + 1)
        w = _collect_samples(samples, js)
        z = quad.nodes[q:]
        dz = quad.dnodes[q:]
        terms = np.exp(z * t)[:, None] * w * dz[:, None]
        # Pairing j with -j gives term_j - conj(term_j) = 2i Im(term_j),
        # and z'_0 = i turns the j = 0 term into i*w_0, so
        # U = (k/2pi) (w_0 + 2 sum_{j>=1} Im term_j).
        acc = w[0] + 2.0 * np.sum(terms[1:].imag, axis=0)
        result = (k / (2.0 * np.pi)) * acc
        scale = np.linalg.norm(result)
        residue = np.linalg.norm(result.imag)
        if scale > 0.0 and residue > 1e-8 * scale:
            raise ValueError(
                f"imaginary residue {residue:.3e} exceeds 1e-8 * ||U|| "
                f"= {1e-8 * scale:.3e}; data are not conjugate symmetric"
            )
        out = result.real
    else:
        js = np.arange(-q, q + 1)
        w = _collect_samples(samples, js)
        terms = np.exp(quad.nodes * t)[:, None] * w * quad.dnodes[:, None]
        out = (k / (2.0j * np.pi)) * np.sum(terms, axis=0)

    return out[0] if scalar_input else out


def solver_error_bound(
    per_point_errors: Union[Mapping[int, float], np.ndarray],
    quad: ContourQuadrature,
    t: float,
) -> float:
    """Bound the transform perturbation from per-node solver errors.

    If every sample w(z_j) is off by at most eps_j in norm, the contour
    sum moves by at most (k/2 pi) sum_j eps_j e^{x_j t} |z'_j| with
    x_j = Re z_j.
    """
    if t <= 0.0:
        raise ValueError(f"need t > 0, got t={t}")
    q = quad.q
    if isinstance(per_point_errors, Mapping):
        eps = np.array(
            [float(per_point_errors[int(j)]) for j in range(-q, q + 1)]
        )
    else:
        eps = np.asarray(per_point_errors, dtype=float)
        if eps.shape != (2 * q + 1,):
            raise DimensionMismatchError(
                f"expected {2 * q + 1} per-node errors, got shape {eps.shape}"
            )
    if np.any(eps < 0.0):
        j_bad = int(np.argmax(eps < 0.0)) - q
        raise ValueError(f"negative per-node error at j={j_bad}")
    x = quad.nodes.real
    return float(
        quad.k / (2.0 * np.pi) * np.sum(eps * np.exp(x * t) * np.abs(quad.dnodes))
    )


def tolerance_budget(delta: float, t: float, quad: ContourQuadrature) -> ToleranceBudget:
    """Split a total error budget delta into per-node tolerances.

    eps_j = delta * e^{-x_j t} / ((q+1) k |z'_j|) makes every term of
    the perturbation bound equal to delta/(2 pi (q+1)), so the total
    stays below delta with room to spare.
    """
    if delta <= 0.0:
        raise ValueError(f"need delta > 0, got delta={delta}")
    if t <= 0.0:
        raise ValueError(f"need t > 0, got t={t}")
    x = quad.nodes.real
    eps = delta * np.exp(-x * t) / ((quad.q + 1) * quad.k * np.abs(quad.dnodes))
    return ToleranceBudget(delta=float(delta), t=float(t), eps=eps)


def write_quadrature_csv(
    path: str,
    quad: ContourQuadrature,
    budget: Optional[ToleranceBudget] = None,
) -> None:
    """Write the node table (and optional tolerances) as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["j", "xi_j", "x_j", "y_j", "abs_dz_j", "eps_j"])
        for p, j in enumerate(quad.js):
            row = [
                int(j),
                f"{quad.xi[p]:.12g}",
                f"{quad.nodes[p].real:.12g}",
                f"{quad.nodes[p].imag:.12g}",
                f"{abs(quad.dnodes[p]):.12g}",
            ]
            row.append(f"{budget.eps[p]:.12g}" if budget is not None else "")
            writer.writerow(row)
