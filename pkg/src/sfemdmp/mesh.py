"""Triangulated surfaces with boundary embedded in 3-space.

A :class:`SurfaceMesh` stores vertex coordinates and triangle connectivity with
all interior vertices numbered before the boundary vertices.  Meshes of the unit
hemisphere and of a half torus can be generated and uniformly refined; new
vertices are projected back onto the exact surface (and boundary midpoints onto
the exact boundary curve).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from .errors import MeshError, ParameterError, UnsupportedOperationError

MAX_HEMISPHERE_LEVEL = 8


class UnitHemisphere:
    """Upper unit hemisphere ``|x| = 1, z >= 0`` bounded by the equator."""

    tag = "unit-hemisphere"

    def project(self, points):
        points = np.asarray(points, dtype=float)
        return points / np.linalg.norm(points, axis=-1, keepdims=True)

    def project_boundary(self, points):
        points = np.array(points, dtype=float)
        points[..., 2] = 0.0
        return points / np.linalg.norm(points, axis=-1, keepdims=True)

    def residual(self, points):
        points = np.asarray(points, dtype=float)
        return np.abs(np.linalg.norm(points, axis=-1) - 1.0)

    def outward_normal(self, points):
        return self.project(points)

    def __eq__(self, other):
        return isinstance(other, UnitHemisphere)

    def __hash__(self):
        return hash(self.tag)

    def __repr__(self):
        return "UnitHemisphere()"


@dataclass(frozen=True)
class Torus:
    """Torus of major radius ``R`` and minor radius ``r`` around the z axis.

    The half torus used here keeps the major angle in ``[0, pi]``; its two
    boundary curves are the minor circles in the plane ``y = 0``.
    """

    R: float
    r: float

    @property
    def tag(self):
        return f"torus({self.R:g},{self.r:g})"

    def _tube_center(self, points):
        rho = np.hypot(points[..., 0], points[..., 1])
        center = np.zeros_like(points)
        center[..., 0] = self.R * points[..., 0] / rho
        center[..., 1] = self.R * points[..., 1] / rho
        return center

    def project(self, points):
        # closest point: major circle first, then rescale the tube offset
        points = np.asarray(points, dtype=float)
        center = self._tube_center(points)
        offset = points - center
        return center + self.r * offset / np.linalg.norm(offset, axis=-1, keepdims=True)

    def project_boundary(self, points):
        points = np.array(points, dtype=float)
        side = np.where(points[..., 0] >= 0.0, 1.0, -1.0)
        center = np.zeros_like(points)
        center[..., 0] = side * self.R
        offset = points - center
        offset[..., 1] = 0.0
        out = center + self.r * offset / np.linalg.norm(offset, axis=-1, keepdims=True)
        out[..., 1] = 0.0
        return out

    def residual(self, points):
        points = np.asarray(points, dtype=float)
        rho = np.hypot(points[..., 0], points[..., 1])
        return np.abs((rho - self.R) ** 2 + points[..., 2] ** 2 - self.r**2)

    def outward_normal(self, points):
        points = np.asarray(points, dtype=float)
        offset = points - self._tube_center(points)
        return offset / np.linalg.norm(offset, axis=-1, keepdims=True)


def _edge_table(triangles):
    """Unique undirected edges, per-triangle edge ids and edge multiplicities.

    Local edge ``k`` of a triangle joins local vertices ``k`` and ``k+1``.
    """
    t = np.asarray(triangles)
    nt = len(t)
    pairs = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    pairs = np.sort(pairs, axis=1)
    edges, inverse, counts = np.unique(pairs, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    tri_edges = np.stack([inverse[:nt], inverse[nt : 2 * nt], inverse[2 * nt :]], axis=1)
    return edges, tri_edges, counts


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Immutable triangulated surface with interior-first node ordering.

    Use :meth:`from_arrays` to build a mesh from arbitrary ordering; the
    constructor itself expects the ordering to be in place already and only
    validates it.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    n_interior: int
    surface: Optional[object] = None
    _validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        t = np.array(self.triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError("vertices must have shape (n, 3)")
        if t.ndim != 2 or t.shape[1] != 3:
            raise MeshError("triangles must have shape (m, 3)")
        v.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "n_interior", int(self.n_interior))
        if self._validate:
            self.validate()

    @classmethod
    def from_arrays(cls, vertices, triangles, surface=None):
        """Build a mesh, renumbering nodes so interior vertices come first.

        The renumbering is a stable sort on ``(is_boundary, index)``.
        """
        v = np.asarray(vertices, dtype=float)
        t = np.asarray(triangles, dtype=np.int64)
        if t.ndim != 2 or t.shape[1] != 3:
            raise MeshError("triangles must have shape (m, 3)")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise MeshError("triangle index out of range")
        edges, _, counts = _edge_table(t)
        on_boundary = np.zeros(len(v), dtype=bool)
        on_boundary[edges[counts == 1].ravel()] = True
        order = np.argsort(on_boundary, kind="stable")
        new_index = np.empty_like(order)
        new_index[order] = np.arange(len(order))
        return cls(v[order], new_index[t], int(np.count_nonzero(~on_boundary)), surface)

    # -- structure -------------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def surface_tag(self):
        return "none" if self.surface is None else self.surface.tag

    @cached_property
    def _edges(self):
        return _edge_table(self.triangles)

    @property
    def edges(self):
        """Unique edges as sorted vertex pairs, shape ``(E, 2)``."""
        return self._edges[0]

    @property
    def boundary_edges(self):
        edges, _, counts = self._edges
        return edges[counts == 1]

    @property
    def n_edges(self):
        return len(self.edges)

    @cached_property
    def is_boundary(self):
        flags = np.zeros(self.n_vertices, dtype=bool)
        flags[self.boundary_edges.ravel()] = True
        flags.setflags(write=False)
        return flags

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_triangles

    @cached_property
    def edge_lengths(self):
        e = self.edges
        return np.linalg.norm(self.vertices[e[:, 1]] - self.vertices[e[:, 0]], axis=1)

    @cached_property
    def areas(self):
        p = self.vertices[self.triangles]
        return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)

    @cached_property
    def h(self):
        """Maximum element diameter (longest edge)."""
        return mesh_h(self)

    def validate(self):
        """Raise :class:`MeshError` if any structural invariant fails."""
        v, t = self.vertices, self.triangles
        if len(t) == 0:
            raise MeshError("mesh has no triangles")
        if t.min() < 0 or t.max() >= len(v):
            raise MeshError("triangle references a nonexistent vertex")
        if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
            raise MeshError("triangle with repeated vertex")
        edges, _, counts = self._edges
        if np.any(counts > 2):
            bad = edges[counts > 2][0]
            raise MeshError(f"nonmanifold edge {tuple(bad)} shared by {counts.max()} triangles")
        h = self.h
        small = np.flatnonzero(self.areas <= 1e-14 * h * h)
        if small.size:
            raise MeshError(f"element {small[0]} has (near) zero area")
        boundary = self.is_boundary
        if not 0 <= self.n_interior <= len(v):
            raise MeshError("n_interior out of range")
        if boundary[: self.n_interior].any() or not boundary[self.n_interior :].all():
            raise MeshError("nodes are not ordered interior-first")


# -- generation ------------------------------------------------------------


def generate_hemisphere(levels):
    """Unit hemisphere mesh refined ``levels`` times.

    The base mesh fans ten triangles out of the north pole to ten equally
    spaced equator points (the upper ring and equatorial ring of an apex-up
    icosahedron, snapped onto the equator).  Hence ``F = 10 * 4**levels``,
    ``B = 10 * 2**levels`` boundary edges and ``V = 1 + (F + B) / 2``.
    """
    if not isinstance(levels, (int, np.integer)) or isinstance(levels, bool):
        raise ParameterError("levels must be an integer")
    if not 0 <= levels <= MAX_HEMISPHERE_LEVEL:
        raise ParameterError(f"levels must lie in [0, {MAX_HEMISPHERE_LEVEL}], got {levels}")
    phi = np.arange(10) * (np.pi / 5.0)
    ring = np.column_stack([np.cos(phi), np.sin(phi), np.zeros(10)])
    vertices = np.vstack([[0.0, 0.0, 1.0], ring])
    triangles = np.array([[0, 1 + k, 1 + (k + 1) % 10] for k in range(10)])
    mesh = SurfaceMesh.from_arrays(vertices, triangles, UnitHemisphere())
    for _ in range(levels):
        mesh = refine(mesh)
    return mesh


def generate_semitorus(R, r, n_major, n_minor):
    """Half torus (major angle in ``[0, pi]``) with chess-ordered vertex rings.

    ``n_major`` rings of ``n_minor`` vertices sit at equally spaced major
    angles; every odd ring is rotated by half a minor step, and neighbouring
    rings are zipped together into ``2 * n_minor`` triangles per strip.
    ``generate_semitorus(5, 2, 9, 4)`` has 36 nodes and 64 elements.
    """
    if not (np.isfinite(R) and np.isfinite(r) and R > r > 0):
        raise ParameterError(f"need R > r > 0, got R={R}, r={r}")
    if int(n_major) != n_major or n_major < 4:
        raise ParameterError(f"n_major must be an integer >= 4, got {n_major}")
    # two vertices per ring would make neighbouring strips share both ring edges
    if int(n_minor) != n_minor or n_minor < 3:
        raise ParameterError(f"n_minor must be an integer >= 3, got {n_minor}")
    n_major, n_minor = int(n_major), int(n_minor)
    surface = Torus(float(R), float(r))
    step = 2.0 * np.pi / n_minor
    verts = []
    for k in range(n_major):
        theta = np.pi * k / (n_major - 1)
        phi = np.arange(n_minor) * step + (k % 2) * 0.5 * step
        rad = R + r * np.cos(phi)
        ring = np.column_stack([rad * np.cos(theta), rad * np.sin(theta), r * np.sin(phi)])
        if k in (0, n_major - 1):
            ring[:, 1] = 0.0
        verts.append(ring)
    vertices = np.vstack(verts)

    tris = []
    for k in range(n_major - 1):
        a0, b0 = k * n_minor, (k + 1) * n_minor
        for j in range(n_minor):
            jn = (j + 1) % n_minor
            if k % 2 == 0:
                # ring k+1 is shifted forward: B_j sits between A_j and A_{j+1}
                tris.append((a0 + j, a0 + jn, b0 + j))
                tris.append((b0 + j, a0 + jn, b0 + jn))
            else:
                tris.append((b0 + j, b0 + jn, a0 + j))
                tris.append((a0 + j, b0 + jn, a0 + jn))
    triangles = _orient_outward(vertices, np.array(tris), surface)
    return SurfaceMesh.from_arrays(vertices, triangles, surface)


def _orient_outward(vertices, triangles, surface):
    p = vertices[triangles]
    normal = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    centroid = p.mean(axis=1)
    flip = np.einsum("ij,ij->i", normal, surface.outward_normal(surface.project(centroid))) < 0
    triangles = triangles.copy()
    triangles[flip] = triangles[flip][:, [0, 2, 1]]
    return triangles


def refine(mesh):
    """Split every triangle into four at its edge midpoints.

    Interior-edge midpoints are projected onto the exact surface, boundary-edge
    midpoints onto the exact boundary curve.  Node ordering is re-established
    by a stable sort on ``(is_boundary, index)`` where old vertices keep their
    indices and midpoints follow in sorted-edge order.
    """
    if mesh.surface is None:
        raise UnsupportedOperationError("refine needs a mesh with a known exact surface")
    edges, tri_edges, counts = mesh._edges
    v = mesh.vertices
    mid = 0.5 * (v[edges[:, 0]] + v[edges[:, 1]])
    on_boundary = counts == 1
    mid[~on_boundary] = mesh.surface.project(mid[~on_boundary])
    mid[on_boundary] = mesh.surface.project_boundary(mid[on_boundary])

    nv = mesh.n_vertices
    m01, m12, m20 = (tri_edges + nv).T
    a, b, c = mesh.triangles.T
    triangles = np.concatenate(
        [
            np.column_stack([a, m01, m20]),
            np.column_stack([m01, b, m12]),
            np.column_stack([m20, m12, c]),
            np.column_stack([m01, m12, m20]),
        ]
    )
    return SurfaceMesh.from_arrays(np.vstack([v, mid]), triangles, mesh.surface)


# -- analytics ---------------------------------------------------------------


@dataclass(frozen=True)
class AngleStats:
    min_angle: float
    max_angle: float
    per_element_angles: np.ndarray
    histogram: np.ndarray
    bin_edges: np.ndarray


def element_angles(vertices, triangles):
    """Interior angles in degrees, shape ``(m, 3)``; column k is the angle at vertex k."""
    p = np.asarray(vertices, dtype=float)[np.asarray(triangles)]
    out = np.empty(p.shape[:2])
    for k in range(3):
        u = p[:, (k + 1) % 3] - p[:, k]
        w = p[:, (k + 2) % 3] - p[:, k]
        out[:, k] = np.arctan2(np.linalg.norm(np.cross(u, w), axis=1), np.einsum("ij,ij->i", u, w))
    return np.degrees(out)


def angle_stats(mesh):
    angles = element_angles(mesh.vertices, mesh.triangles)
    edges = np.linspace(0.0, 180.0, 19)
    hist, _ = np.histogram(angles, bins=edges)
    return AngleStats(float(angles.min()), float(angles.max()), angles, hist, edges)


def mesh_h(mesh):
    """Largest edge length over all elements."""
    p = mesh.vertices[mesh.triangles]
    lengths = np.linalg.norm(p - np.roll(p, -1, axis=1), axis=2)
    return float(lengths.max())


def mesh_regularity(mesh) -> Tuple[float, float]:
    """Return ``(min, max)`` of element area divided by ``h**2``."""
    ratio = mesh.areas / mesh.h**2
    return float(ratio.min()), float(ratio.max())


def surface_residual(mesh):
    """Largest implicit-equation residual over the vertices (0 for untagged meshes)."""
    if mesh.surface is None:
        return 0.0
    return float(mesh.surface.residual(mesh.vertices).max())
