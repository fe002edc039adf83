"""Triangulations of planar domains: a structured trapezium generator
and a reader/writer for Triangle-style .node/.ele files.

The generator covers the trapezium with corners (1,0), (0,1), (-1,1),
(-1,0) by a uniform grid of spacing 1/m; grid squares are split along
the diagonal parallel to the slanted edge x + y = 1, so that edge is
resolved exactly and every element is a right triangle of area
1/(2 m^2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import MeshFormatError

__all__ = [
    "Mesh",
    "generate_trapezium_mesh",
    "read_mesh",
    "write_mesh",
    "signed_areas",
]


@dataclass(frozen=True)
class Mesh:
    """2D triangulation with per-vertex boundary flags.

    Triangles are triples of vertex indices in counterclockwise order;
    ``h`` is the longest element edge.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray
    h: float

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]


def signed_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Signed area of each triangle; positive means counterclockwise."""
    p0 = vertices[triangles[:, 0]]
    p1 = vertices[triangles[:, 1]]
    p2 = vertices[triangles[:, 2]]
    return 0.5 * (
        (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
        - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1])
    )


def _max_edge(vertices: np.ndarray, triangles: np.ndarray) -> float:
    h = 0.0
    for shift in range(3):
        a = vertices[triangles[:, shift]]
        b = vertices[triangles[:, (shift + 1) % 3]]
        h = max(h, float(np.max(np.linalg.norm(a - b, axis=1))))
    return h


def generate_trapezium_mesh(m: int) -> Mesh:
    """Structured mesh of the trapezium (1,0), (0,1), (-1,1), (-1,0).

    Grid points are (i/m, j/m) with -m <= i <= m, 0 <= j <= m and
    i + j <= m.  Boundary vertices lie on y=0, x=-1, y=1 or x+y=1.
    """
    if m < 2:
        raise ValueError(f"need m >= 2, got m={m}")

    index = {}
    verts: List[Tuple[float, float]] = []
    bnd: List[bool] = []
    for j in range(m + 1):
        for i in range(-m, m + 1):
            if i + j > m:
                continue
            index[(i, j)] = len(verts)
            verts.append((i / m, j / m))
            bnd.append(j == 0 or j == m or i == -m or i + j == m)

    tris: List[Tuple[int, int, int]] = []
    for j in range(m):
        for i in range(-m, m):
            if i + j > m - 1:
                continue
            v00 = index[(i, j)]
            v10 = index[(i + 1, j)]
            v01 = index[(i, j + 1)]
            # Lower-left triangle; its hypotenuse is parallel to x+y=1.
            tris.append((v00, v10, v01))
            if i + j <= m - 2:
                v11 = index[(i + 1, j + 1)]
                tris.append((v10, v11, v01))

    vertices = np.array(verts, dtype=float)
    triangles = np.array(tris, dtype=np.int64)
    return Mesh(
        vertices=vertices,
        triangles=triangles,
        boundary=np.array(bnd, dtype=bool),
        h=_max_edge(vertices, triangles),
    )


def _data_lines(path: str):
    """Yield (line_number, tokens) for non-comment, non-blank lines."""
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if text:
                yield lineno, text.split()


def _parse(tokens: List[str], kinds, path: str, lineno: int) -> list:
    if len(tokens) < len(kinds):
        raise MeshFormatError(
            f"expected at least {len(kinds)} fields, got {len(tokens)}",
            path=path,
            line=lineno,
        )
    out = []
    for tok, kind in zip(tokens, kinds):
        try:
            out.append(kind(tok))
        except ValueError:
            raise MeshFormatError(
                f"cannot parse {tok!r} as {kind.__name__}", path=path, line=lineno
            ) from None
    return out


def read_mesh(node_file: str, ele_file: str) -> Mesh:
    """Read a Triangle-format mesh (1-based indices, '#' comments).

    .node header: count dim n_attrs n_markers; vertex lines carry index,
    x, y, optional attributes and an optional boundary marker.
    .ele header: count nodes_per_triangle n_attrs; element lines carry
    index and three vertex indices.  Clockwise triangles are reordered
    with a warning; zero-area triangles are rejected.
    """
    lines = _data_lines(node_file)
    try:
        lineno, tokens = next(lines)
    except StopIteration:
        raise MeshFormatError("empty node file", path=node_file) from None
    count, dim, n_attr, n_marker = _parse(tokens, (int, int, int, int), node_file, lineno)
    if dim != 2:
        raise MeshFormatError(f"expected dimension 2, got {dim}", path=node_file, line=lineno)
    if n_marker not in (0, 1):
        raise MeshFormatError(
            f"boundary marker count must be 0 or 1, got {n_marker}",
            path=node_file,
            line=lineno,
        )

    vertices = np.zeros((count, 2))
    boundary = np.zeros(count, dtype=bool)
    seen = 0
    for lineno, tokens in lines:
        kinds = [int, float, float] + [float] * n_attr + [int] * n_marker
        fields = _parse(tokens, kinds, node_file, lineno)
        idx = fields[0] - 1
        if not 0 <= idx < count:
            raise MeshFormatError(
                f"vertex index {fields[0]} outside 1..{count}",
                path=node_file,
                line=lineno,
            )
        vertices[idx] = fields[1], fields[2]
        if n_marker:
            boundary[idx] = fields[3 + n_attr] != 0
        seen += 1
    if seen != count:
        raise MeshFormatError(
            f"header announced {count} vertices but file has {seen}", path=node_file
        )

    lines = _data_lines(ele_file)
    try:
        lineno, tokens = next(lines)
    except StopIteration:
        raise MeshFormatError("empty element file", path=ele_file) from None
    tcount, per_tri, _ = _parse(tokens, (int, int, int), ele_file, lineno)
    if per_tri != 3:
        raise MeshFormatError(
            f"expected 3 vertices per element, got {per_tri}", path=ele_file, line=lineno
        )

    triangles = np.zeros((tcount, 3), dtype=np.int64)
    seen = 0
    flipped = 0
    for lineno, tokens in lines:
        fields = _parse(tokens, (int, int, int, int), ele_file, lineno)
        idx = fields[0] - 1
        if not 0 <= idx < tcount:
            raise MeshFormatError(
                f"element index {fields[0]} outside 1..{tcount}",
                path=ele_file,
                line=lineno,
            )
        tri = np.array(fields[1:4], dtype=np.int64) - 1
        if np.any(tri < 0) or np.any(tri >= count):
            raise MeshFormatError(
                f"vertex reference outside 1..{count}", path=ele_file, line=lineno
            )
        area = signed_areas(vertices, tri[None, :])[0]
        if area == 0.0:
            raise MeshFormatError(
                "degenerate (zero-area) triangle", path=ele_file, line=lineno
            )
        if area < 0.0:
            tri = tri[[0, 2, 1]]
            flipped += 1
        triangles[idx] = tri
        seen += 1
    if seen != tcount:
        raise MeshFormatError(
            f"header announced {tcount} elements but file has {seen}", path=ele_file
        )
    if flipped:
        warnings.warn(
            f"reordered {flipped} clockwise triangle(s) to counterclockwise",
            stacklevel=2,
        )

    return Mesh(
        vertices=vertices,
        triangles=triangles,
        boundary=boundary,
        h=_max_edge(vertices, triangles),
    )


def write_mesh(mesh: Mesh, node_file: str, ele_file: str) -> None:
    """Write a mesh in the Triangle format accepted by read_mesh."""
    with open(node_file, "w") as fh:
        fh.write(f"{mesh.num_vertices} 2 0 1\n")
        for i, (x, y) in enumerate(mesh.vertices, start=1):
            fh.write(f"{i} {x:.17g} {y:.17g} {int(mesh.boundary[i - 1])}\n")
    with open(ele_file, "w") as fh:
        fh.write(f"{mesh.num_triangles} 3 0\n")
        for i, tri in enumerate(mesh.triangles, start=1):
            fh.write(f"{i} {tri[0] + 1} {tri[1] + 1} {tri[2] + 1}\n")
