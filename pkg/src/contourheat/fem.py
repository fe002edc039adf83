"""Piecewise-linear finite elements on triangulations.

Assembly produces the mass matrix M, the stiffness matrix S scaled by a
constant diffusivity a, and the row-sum lumped mass D, all reduced to
the interior vertices (homogeneous Dirichlet conditions by row/column
elimination).  The reduced matrices are real, symmetric and positive
definite, which every solver in this package relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateGeometryError, DimensionMismatchError
from .mesh import Mesh, signed_areas

__all__ = [
    "FemSpace",
    "assemble",
    "assemble_matrices",
    "discrete_norm",
    "interpolate",
    "load_vector",
]

# Element mass matrix of a triangle is (area/12) * this stencil.
_MASS_STENCIL = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]])


@dataclass(frozen=True)
class FemSpace:
    """P1 space on the interior vertices of a mesh.

    ``interior`` maps global vertex index to equation index (-1 on the
    boundary); ``nodes`` lists the coordinates of the unknowns in
    equation order.  M, S, D act on interior vectors only.
    """

    mesh: Mesh
    a: float
    interior: np.ndarray
    nodes: np.ndarray
    mass: sp.csr_matrix
    stiffness: sp.csr_matrix
    lumped: np.ndarray

    @property
    def size(self) -> int:
        return self.nodes.shape[0]


def _element_matrices(
    points: np.ndarray, area: float, a: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Mass and stiffness contributions of one triangle."""
    x, y = points[:, 0], points[:, 1]
    b = np.array([y[1] - y[2], y[2] - y[0], y[0] - y[1]])
    c = np.array([x[2] - x[1], x[0] - x[2], x[1] - x[0]])
    ke = a * (np.outer(b, b) + np.outer(c, c)) / (4.0 * area)
    me = (area / 12.0) * _MASS_STENCIL
    return me, ke


def assemble_matrices(mesh: Mesh, a: float) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
    """Assemble the full (unreduced) mass and stiffness matrices."""
    if a <= 0.0:
        raise ValueError(f"need diffusivity a > 0, got a={a}")
    areas = signed_areas(mesh.vertices, mesh.triangles)
    tol = 1e-14 * mesh.h**2
    bad = np.flatnonzero(areas <= tol)
    if bad.size:
        raise DegenerateGeometryError(
            f"triangle {bad[0]} has nonpositive area {areas[bad[0]]:.3e}"
        )

    ntri = mesh.num_triangles
    rows = np.empty(9 * ntri, dtype=np.int64)
    cols = np.empty(9 * ntri, dtype=np.int64)
    mvals = np.empty(9 * ntri)
    kvals = np.empty(9 * ntri)
    for t in range(ntri):
        tri = mesh.triangles[t]
        me, ke = _element_matrices(mesh.vertices[tri], areas[t], a)
        grid = np.meshgrid(tri, tri, indexing="ij")
        sl = slice(9 * t, 9 * t + 9)
        rows[sl] = grid[0].ravel()
        cols[sl] = grid[1].ravel()
        mvals[sl] = me.ravel()
        kvals[sl] = ke.ravel()

    n = mesh.num_vertices
    mass = sp.coo_matrix((mvals, (rows, cols)), shape=(n, n)).tocsr()
    stiffness = sp.coo_matrix((kvals, (rows, cols)), shape=(n, n)).tocsr()
    mass.sum_duplicates()
    stiffness.sum_duplicates()
    return mass, stiffness


def assemble(mesh: Mesh, a: float) -> FemSpace:
    """Assemble M, S, lumped D on the interior vertices."""
    mass_full, stiff_full = assemble_matrices(mesh, a)
    interior = np.full(mesh.num_vertices, -1, dtype=np.int64)
    free = np.flatnonzero(~mesh.boundary)
    interior[free] = np.arange(free.size)
    mass = mass_full[np.ix_(free, free)].tocsr()
    stiffness = stiff_full[np.ix_(free, free)].tocsr()
    lumped = np.asarray(mass.sum(axis=1)).ravel()
    return FemSpace(
        mesh=mesh,
        a=float(a),
        interior=interior,
        nodes=mesh.vertices[free],
        mass=mass,
        stiffness=stiffness,
        lumped=lumped,
    )


def discrete_norm(v: np.ndarray, space: FemSpace) -> float:
    """M-weighted norm sqrt(Re v^H M v), the discrete L2 norm."""
    v = np.asarray(v)
    if v.shape != (space.size,):
        raise DimensionMismatchError(
            f"vector of shape {v.shape} does not match {space.size} unknowns"
        )
    return float(np.sqrt(max(np.real(np.vdot(v, space.mass @ v)), 0.0)))


def interpolate(fun: Callable[[np.ndarray, np.ndarray], np.ndarray], space: FemSpace) -> np.ndarray:
    """Nodal values fun(x, y) at the interior vertices."""
    return fun(space.nodes[:, 0], space.nodes[:, 1])


def load_vector(
    fun: Callable[[np.ndarray, np.ndarray], np.ndarray], space: FemSpace
) -> np.ndarray:
    """Inner products (fun, Phi_i) for the interior basis functions.

    Element integrals use the three edge midpoints, where the quadratic
    products fun*Phi_i are integrated exactly for linear fun; each P1
    basis function equals 1/2 on its two adjacent midpoints.
    """
    mesh = space.mesh
    areas = signed_areas(mesh.vertices, mesh.triangles)
    p0 = mesh.vertices[mesh.triangles[:, 0]]
    p1 = mesh.vertices[mesh.triangles[:, 1]]
    p2 = mesh.vertices[mesh.triangles[:, 2]]
    mids = [(p0 + p1) / 2.0, (p1 + p2) / 2.0, (p2 + p0) / 2.0]
    fvals = [fun(m[:, 0], m[:, 1]) for m in mids]

    sample = np.asarray(fvals[0])
    acc = np.zeros(mesh.num_vertices, dtype=sample.dtype)
    w = areas / 3.0
    # Vertex l is adjacent to midpoints l-1 and l (cyclic), each with
    # basis value 1/2.
    np.add.at(acc, mesh.triangles[:, 0], w * 0.5 * (fvals[0] + fvals[2]))
    np.add.at(acc, mesh.triangles[:, 1], w * 0.5 * (fvals[0] + fvals[1]))
    np.add.at(acc, mesh.triangles[:, 2], w * 0.5 * (fvals[1] + fvals[2]))
    return acc[~mesh.boundary]
