"""Conforming simplicial meshes of an interval or a polygon.

Meshes are plain vertex/cell arrays plus a per-vertex boundary flag.  The
generators produce the structured families used throughout (uniform
subdivision of the unit interval, fixed-diagonal triangulation of the unit
square); arbitrary meshes can be loaded from a small text format.  All cells
are positively oriented: intervals run left to right, triangles are
counterclockwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Vertices at or beyond this shape-regularity ratio are rejected by validate().
# The structured square family sits at 1 + sqrt(2), so 10 leaves headroom for
# file-loaded meshes without admitting slivers.
SHAPE_REGULARITY_LIMIT = 10.0

# Marker used by interior_dof_map for constrained (boundary) vertices.
BOUNDARY = -1


class MeshError(ValueError):
    """Raised when mesh data violates a structural invariant."""


@dataclass(frozen=True)
class Mesh:
    """Immutable simplicial mesh.

    Attributes
    ----------
    dim : int
        Ambient dimension, 1 or 2.
    vertices : ndarray, shape (n_vertices, dim)
        Vertex coordinates.
    cells : ndarray, shape (n_cells, dim + 1)
        0-based vertex indices per cell, positively oriented.
    boundary_flags : ndarray of bool, shape (n_vertices,)
        True for vertices on the Dirichlet boundary.
    h : float
        Largest cell diameter.
    """

    dim: int
    vertices: np.ndarray
    cells: np.ndarray
    boundary_flags: np.ndarray
    h: float

    def __post_init__(self):
        for arr in (self.vertices, self.cells, self.boundary_flags):
            arr.setflags(write=False)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def n_interior(self) -> int:
        return int(np.count_nonzero(~self.boundary_flags))


def _make_mesh(dim, vertices, cells, boundary_flags) -> Mesh:
    vertices = np.ascontiguousarray(vertices, dtype=float)
    cells = np.ascontiguousarray(cells, dtype=np.int64)
    boundary_flags = np.ascontiguousarray(boundary_flags, dtype=bool)
    h = float(cell_diameters(vertices, cells).max())
    return Mesh(dim, vertices, cells, boundary_flags, h)


def cell_diameters(vertices: np.ndarray, cells: np.ndarray) -> np.ndarray:
    """Diameter (longest edge) of every cell."""
    coords = vertices[cells]  # (n_cells, dim+1, dim)
    nv = cells.shape[1]
    diam = np.zeros(cells.shape[0])
    for i in range(nv):
        for j in range(i + 1, nv):
            edge = np.linalg.norm(coords[:, i] - coords[:, j], axis=-1)
            diam = np.maximum(diam, edge)
    return diam


def cell_measures(mesh: Mesh) -> np.ndarray:
    """Signed length (1d) or signed area (2d) of every cell."""
    coords = mesh.vertices[mesh.cells]
    if mesh.dim == 1:
        return coords[:, 1, 0] - coords[:, 0, 0]
    d1 = coords[:, 1] - coords[:, 0]
    d2 = coords[:, 2] - coords[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def shape_ratios(mesh: Mesh) -> np.ndarray:
    """Diameter over inscribed-ball diameter, per cell.

    For intervals the inscribed ball is the cell itself, so the ratio is 1.
    For triangles the inscribed circle has diameter 4*area/perimeter.
    """
    if mesh.dim == 1:
        return np.ones(mesh.n_cells)
    coords = mesh.vertices[mesh.cells]
    a, b, c = coords[:, 0], coords[:, 1], coords[:, 2]
    perimeter = (
        np.linalg.norm(b - a, axis=-1)
        + np.linalg.norm(c - b, axis=-1)
        + np.linalg.norm(a - c, axis=-1)
    )
    area = np.abs(cell_measures(mesh))
    with np.errstate(divide="ignore", invalid="ignore"):
        return cell_diameters(mesh.vertices, mesh.cells) * perimeter / (4.0 * area)


def generate_unit_interval(n_cells: int) -> Mesh:
    """Uniform mesh of [0, 1] with ``n_cells`` segments.

    Vertex i sits at i/n_cells; the two endpoints carry the boundary flag.
    """
    if n_cells < 1:
        raise MeshError(f"need at least one cell, got {n_cells}")
    vertices = (np.arange(n_cells + 1, dtype=float) / n_cells)[:, None]
    cells = np.column_stack([np.arange(n_cells), np.arange(1, n_cells + 1)])
    flags = np.zeros(n_cells + 1, dtype=bool)
    flags[0] = flags[-1] = True
    return _make_mesh(1, vertices, cells, flags)


def generate_unit_square(n_per_side: int) -> Mesh:
    """Structured triangulation of [0, 1]^2 with ``n_per_side`` squares per side.

    Each grid square is split along the diagonal from its lower-left to its
    upper-right corner, giving 2*n^2 congruent right triangles and mesh size
    h = sqrt(2)/n.  Boundary flags mark every vertex with a coordinate at 0
    or 1.
    """
    n = n_per_side
    if n < 1:
        raise MeshError(f"need at least one square per side, got {n}")
    side = np.arange(n + 1, dtype=float) / n
    xx, yy = np.meshgrid(side, side)  # row j is y = j/n
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i, j):
        return j * (n + 1) + i

    cells = []
    for j in range(n):
        for i in range(n):
            ll, lr = vid(i, j), vid(i + 1, j)
            ur, ul = vid(i + 1, j + 1), vid(i, j + 1)
            cells.append((ll, lr, ur))
            cells.append((ll, ur, ul))
    flags = (
        (vertices[:, 0] == 0.0)
        | (vertices[:, 0] == 1.0)
        | (vertices[:, 1] == 0.0)
        | (vertices[:, 1] == 1.0)
    )
    return _make_mesh(2, vertices, np.asarray(cells), flags)


def _edge_key(a: int, b: int) -> tuple:
    return (a, b) if a < b else (b, a)


def _boundary_edges(cells: np.ndarray) -> set:
    """Edges that belong to exactly one triangle (combinatorial boundary)."""
    count: dict = {}
    for tri in cells:
        for k in range(3):
            e = _edge_key(tri[k], tri[(k + 1) % 3])
            count[e] = count.get(e, 0) + 1
    return {e for e, c in count.items() if c == 1}


def refine_uniform(mesh: Mesh) -> Mesh:
    """Split every cell at edge midpoints.

    Intervals split in two; triangles split into four congruent children, so
    shape ratios are preserved and the mesh size halves.  Midpoints of
    boundary edges inherit the boundary flag; midpoints of interior edges do
    not, even when both edge endpoints are flagged.
    """
    verts = [mesh.vertices]
    midpoint_id: dict = {}
    next_id = mesh.n_vertices

    def midpoint(a, b):
        nonlocal next_id
        key = _edge_key(a, b)
        if key not in midpoint_id:
            midpoint_id[key] = next_id
            verts.append((mesh.vertices[a] + mesh.vertices[b]) / 2.0)
            next_id += 1
        return midpoint_id[key]

    new_cells = []
    if mesh.dim == 1:
        for a, b in mesh.cells:
            m = midpoint(a, b)
            new_cells.append((a, m))
            new_cells.append((m, b))
        new_boundary = set()
    else:
        for a, b, c in mesh.cells:
            mab, mbc, mca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_cells.append((a, mab, mca))
            new_cells.append((mab, b, mbc))
            new_cells.append((mca, mbc, c))
            new_cells.append((mab, mbc, mca))
        new_boundary = _boundary_edges(mesh.cells)

    vertices = np.vstack([verts[0]] + [v[None, :] for v in verts[1:]])
    flags = np.zeros(len(vertices), dtype=bool)
    flags[: mesh.n_vertices] = mesh.boundary_flags
    for edge, vid_new in midpoint_id.items():
        if edge in new_boundary:
            flags[vid_new] = True
    return _make_mesh(mesh.dim, vertices, np.asarray(new_cells), flags)


def interior_dof_map(mesh: Mesh) -> np.ndarray:
    """Map vertex index to interior unknown index, BOUNDARY (-1) if constrained.

    Interior unknowns are numbered 0..n_interior-1 in vertex order.
    """
    dof = np.full(mesh.n_vertices, BOUNDARY, dtype=np.int64)
    interior = np.flatnonzero(~mesh.boundary_flags)
    dof[interior] = np.arange(interior.size)
    return dof


def validate(mesh: Mesh, shape_limit: float = SHAPE_REGULARITY_LIMIT) -> None:
    """Check structural invariants, raising MeshError on the first violation.

    Checks: index ranges, positive orientation, conformity (an edge is shared
    by at most two triangles, duplicate cells are rejected), boundary flags
    consistent with the combinatorial boundary, shape regularity below
    ``shape_limit``, and that cell measures add up to the measure enclosed by
    the combinatorial boundary (catches overlaps and holes).
    """
    if mesh.dim not in (1, 2):
        raise MeshError(f"unsupported dimension {mesh.dim}")
    if mesh.vertices.ndim != 2 or mesh.vertices.shape[1] != mesh.dim:
        raise MeshError("vertex array shape does not match dimension")
    if mesh.cells.ndim != 2 or mesh.cells.shape[1] != mesh.dim + 1:
        raise MeshError("cell array shape does not match dimension")
    if mesh.boundary_flags.shape != (mesh.n_vertices,):
        raise MeshError("boundary flag array does not match vertex count")
    if mesh.n_cells == 0:
        raise MeshError("mesh has no cells")
    if mesh.cells.min() < 0 or mesh.cells.max() >= mesh.n_vertices:
        raise MeshError("cell refers to a vertex that does not exist")
    for cell in mesh.cells:
        if len(set(cell.tolist())) != len(cell):
            raise MeshError(f"degenerate cell with repeated vertex: {cell.tolist()}")

    measures = cell_measures(mesh)
    if not (measures > 0.0).all():
        bad = int(np.argmin(measures))
        raise MeshError(f"cell {bad} is not positively oriented (measure {measures[bad]:g})")

    ratios = shape_ratios(mesh)
    if not (ratios < shape_limit).all():
        bad = int(np.argmax(ratios))
        raise MeshError(f"cell {bad} fails shape regularity: ratio {ratios[bad]:g}")

    if mesh.dim == 1:
        _validate_1d(mesh, measures)
    else:
        _validate_2d(mesh, measures)

    if not mesh.boundary_flags.any():
        raise MeshError("no boundary vertices flagged; homogeneous Dirichlet needs a boundary")


def _validate_1d(mesh: Mesh, measures: np.ndarray) -> None:
    count = np.zeros(mesh.n_vertices, dtype=int)
    for a, b in mesh.cells:
        count[a] += 1
        count[b] += 1
    if count.max() > 2 or count.min() < 1:
        raise MeshError("interval mesh is not a chain (vertex in 0 or >2 cells)")
    ends = np.flatnonzero(count == 1)
    if ends.size != 2:
        raise MeshError("interval mesh must have exactly two endpoints")
    expected = set(ends.tolist())
    flagged = set(np.flatnonzero(mesh.boundary_flags).tolist())
    if flagged != expected:
        raise MeshError("boundary flags disagree with chain endpoints")
    span = mesh.vertices[:, 0].max() - mesh.vertices[:, 0].min()
    if abs(measures.sum() - span) > 1e-12 * max(span, 1.0):
        raise MeshError("cells do not partition the interval (overlap or gap)")


def _validate_2d(mesh: Mesh, measures: np.ndarray) -> None:
    seen = set()
    for tri in mesh.cells:
        key = tuple(sorted(tri.tolist()))
        if key in seen:
            raise MeshError(f"duplicate cell {sorted(tri.tolist())}")
        seen.add(key)

    count: dict = {}
    oriented: dict = {}
    for tri in mesh.cells:
        for k in range(3):
            a, b = int(tri[k]), int(tri[(k + 1) % 3])
            e = _edge_key(a, b)
            count[e] = count.get(e, 0) + 1
            oriented.setdefault(e, []).append((a, b))
    if max(count.values()) > 2:
        raise MeshError("edge shared by more than two triangles")

    boundary_edges = [oriented[e][0] for e, c in count.items() if c == 1]
    on_boundary = np.zeros(mesh.n_vertices, dtype=bool)
    for a, b in boundary_edges:
        on_boundary[a] = on_boundary[b] = True
    if not np.array_equal(on_boundary, mesh.boundary_flags):
        raise MeshError("boundary flags disagree with the combinatorial boundary")

    # Shoelace over the oriented boundary edges gives the enclosed area; a
    # double-covered or missing patch breaks the match with the cell sum.
    enclosed = 0.0
    for a, b in boundary_edges:
        xa, ya = mesh.vertices[a]
        xb, yb = mesh.vertices[b]
        enclosed += 0.5 * (xa * yb - xb * ya)
    total = measures.sum()
    if abs(total - enclosed) > 1e-12 * max(abs(enclosed), 1.0):
        raise MeshError("cell areas do not add up to the enclosed area (overlap or gap)")


def write_mesh(mesh: Mesh, path) -> None:
    """Write the plain-text mesh format.

    Line 1: ``dim n_vertices n_cells``; then one line per vertex with the
    coordinates followed by the boundary flag (0/1); then one line per cell
    with 0-based vertex indices.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{mesh.dim} {mesh.n_vertices} {mesh.n_cells}\n")
        for xy, flag in zip(mesh.vertices, mesh.boundary_flags):
            coords = " ".join(f"{c:.17g}" for c in xy)
            fh.write(f"{coords} {int(flag)}\n")
        for cell in mesh.cells:
            fh.write(" ".join(str(int(v)) for v in cell) + "\n")


def read_mesh(path) -> Mesh:
    """Read the plain-text mesh format and validate the result.

    Cells with negative orientation are flipped rather than rejected.
    """
    with open(path, "r", encoding="utf-8") as fh:
        tokens_per_line = [line.split() for line in fh]

    lines = [t for t in tokens_per_line if t]
    if not lines:
        raise MeshError(f"{path}: empty mesh file")
    header = lines[0]
    if len(header) != 3:
        raise MeshError(f"{path}: header must be 'dim n_vertices n_cells'")
    try:
        dim, nv, nc = (int(t) for t in header)
    except ValueError as exc:
        raise MeshError(f"{path}: bad header {' '.join(header)!r}") from exc
    if len(lines) != 1 + nv + nc:
        raise MeshError(f"{path}: expected {1 + nv + nc} lines, found {len(lines)}")

    vertices = np.zeros((nv, dim))
    flags = np.zeros(nv, dtype=bool)
    for i, tok in enumerate(lines[1 : 1 + nv]):
        if len(tok) != dim + 1:
            raise MeshError(f"{path}: vertex line {i} needs {dim} coordinates and a flag")
        vertices[i] = [float(t) for t in tok[:dim]]
        flags[i] = bool(int(tok[dim]))

    cells = np.zeros((nc, dim + 1), dtype=np.int64)
    for i, tok in enumerate(lines[1 + nv :]):
        if len(tok) != dim + 1:
            raise MeshError(f"{path}: cell line {i} needs {dim + 1} vertex indices")
        cells[i] = [int(t) for t in tok]

    mesh = _make_mesh(dim, vertices, cells, flags)
    measures = cell_measures(mesh)
    if (measures < 0).any():
        fixed = cells.copy()
        flip = measures < 0
        fixed[flip, -2], fixed[flip, -1] = cells[flip, -1], cells[flip, -2]
        mesh = _make_mesh(dim, vertices, fixed, flags)
    validate(mesh)
    return mesh
