"""P1 surface finite element assembly.

Basis gradients are tangential and constant per element.  Integrals use the
edge-midpoint rule (exact for quadratics).  :func:`assemble` returns the square
system whose interior rows hold ``a_ij = b_ij + r_ij`` and whose boundary rows
are identity rows.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import AssemblyError, GeometryError
from .problems import r_of

# barycentric coordinates of the edge midpoints (0-1, 1-2, 2-0)
MIDPOINT_BARYCENTRIC = np.array(
    [
        [0.5, 0.5, 0.0],
        [0.0, 0.5, 0.5],
        [0.5, 0.0, 0.5],
    ]
)


@dataclass(frozen=True)
class ElementGeometry:
    vertex_coords: np.ndarray
    area: float
    unit_normal: np.ndarray
    basis_gradients: np.ndarray


def _geometry_arrays(p):
    """Areas, unit normals and basis gradients for stacked triangles ``p`` (m, 3, 3)."""
    cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    twice_area = np.linalg.norm(cross, axis=1)
    normal = cross / twice_area[:, None]
    grads = np.empty_like(p)
    for a in range(3):
        opposite = p[:, (a + 2) % 3] - p[:, (a + 1) % 3]
        grads[:, a] = np.cross(normal, opposite) / twice_area[:, None]
    return 0.5 * twice_area, normal, grads


def element_geometry(coords):
    p = np.asarray(coords, dtype=float).reshape(1, 3, 3)
    scale = max(np.ptp(p[0], axis=0).max(), np.finfo(float).tiny)
    cross = np.cross(p[0, 1] - p[0, 0], p[0, 2] - p[0, 0])
    if not np.all(np.isfinite(p)) or np.linalg.norm(cross) <= 1e-14 * scale**2:
        raise GeometryError("degenerate triangle")
    area, normal, grads = _geometry_arrays(p)
    return ElementGeometry(p[0].copy(), float(area[0]), normal[0], grads[0])


def gradient_pair_products(geom):
    """Matrix of dot products between the three basis gradients."""
    g = geom.basis_gradients
    return g @ g.T


def quad_edge_midpoint(f, geom):
    """Edge-midpoint rule ``area/3 * sum f(m_k)`` over the element."""
    mids = MIDPOINT_BARYCENTRIC @ geom.vertex_coords
    return geom.area / 3.0 * sum(float(f(m)) for m in mids)


def _check_finite(values, what, n_elements):
    bad = ~np.isfinite(values)
    if bad.any():
        element = int(np.flatnonzero(bad.reshape(n_elements, -1).any(axis=1))[0])
        raise AssemblyError(f"non-finite {what} on element {element}")


def element_matrices(mesh, problem, iterate, lift="mesh"):
    """Per-element diffusion and reaction matrices and loads at the iterate.

    Returns ``(stiffness, reaction, load)`` with shapes ``(m, 3, 3)``,
    ``(m, 3, 3)`` and ``(m, 3)``.  Entry ``[e, a, b]`` of a matrix is the
    element-``e`` contribution for local vertices ``a`` and ``b`` with ``b``
    and ``r`` frozen at the iterate.
    """
    c = np.asarray(iterate, dtype=float)
    nv = mesh.n_vertices
    if c.shape != (nv,):
        raise ValueError(f"iterate must have shape ({nv},), got {c.shape}")
    if not np.all(np.isfinite(c)):
        raise AssemblyError("iterate has non-finite entries")
    if lift not in ("mesh", "exact"):
        raise ValueError("lift must be 'mesh' or 'exact'")

    tri = mesh.triangles
    m = len(tri)
    p = mesh.vertices[tri]
    area, _, grads = _geometry_arrays(p)
    pair = np.einsum("eak,ebk->eab", grads, grads)

    ce = c[tri]
    xq = np.einsum("qa,eak->eqk", MIDPOINT_BARYCENTRIC, p)
    if lift == "exact":
        if mesh.surface is None:
            raise ValueError("exact lift needs a mesh with a known surface")
        xq = mesh.surface.project(xq)
    uq = ce @ MIDPOINT_BARYCENTRIC.T
    grad_u = np.einsum("ea,eak->ek", ce, grads)
    xi = np.broadcast_to(grad_u[:, None, :], xq.shape)

    bq = np.broadcast_to(np.asarray(problem.b(xq, uq, xi), dtype=float), uq.shape)
    _check_finite(bq, "diffusion coefficient b", m)
    rq = np.broadcast_to(np.asarray(r_of(problem, xq, uq), dtype=float), uq.shape)
    _check_finite(rq, "reaction quotient r", m)
    fq = np.broadcast_to(np.asarray(problem.fhat(xq), dtype=float), uq.shape)
    _check_finite(fq, "source f - q(., 0)", m)

    w = area / 3.0
    stiffness = (w * bq.sum(axis=1))[:, None, None] * pair
    reaction = np.einsum("e,eq,qa,qb->eab", w, rq, MIDPOINT_BARYCENTRIC, MIDPOINT_BARYCENTRIC)
    load = np.einsum("e,eq,qa->ea", w, fq, MIDPOINT_BARYCENTRIC)
    return stiffness, reaction, load


def assemble(mesh, problem, iterate, lift="mesh"):
    """Assemble ``(A_bar, d)`` at the nodal iterate.

    Parameters
    ----------
    mesh : SurfaceMesh
    problem : ProblemSpec
    iterate : array_like, shape (n_vertices,)
        Nodal coefficients of the current approximation.
    lift : {"mesh", "exact"}
        Where coefficients see their space argument: at the quadrature point
        on the flat element, or at its projection onto the exact surface.

    Returns
    -------
    A_bar : scipy.sparse.csr_matrix
        Square matrix; rows ``< n_interior`` are the discrete equations,
        the remaining rows are identity rows.
    d : ndarray
        Load vector; boundary entries hold ``g`` at the boundary nodes.
    """
    stiffness, reaction, load = element_matrices(mesh, problem, iterate, lift)
    nv, n = mesh.n_vertices, mesh.n_interior
    tri = mesh.triangles

    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    vals = (stiffness + reaction).ravel()
    keep = rows < n
    boundary = np.arange(n, nv)
    rows = np.concatenate([rows[keep], boundary])
    cols = np.concatenate([cols[keep], boundary])
    vals = np.concatenate([vals[keep], np.ones(nv - n)])
    A_bar = sp.csr_matrix((vals, (rows, cols)), shape=(nv, nv))
    A_bar.sum_duplicates()
    A_bar.sort_indices()

    d = np.zeros(nv)
    np.add.at(d, tri.ravel(), load.ravel())
    d[n:] = boundary_values(mesh, problem)
    return A_bar, d


def boundary_values(mesh, problem):
    """Dirichlet data at the boundary nodes, in node order."""
    xb = mesh.vertices[mesh.n_interior :]
    return np.broadcast_to(np.asarray(problem.g(xb), dtype=float), (len(xb),)).copy()


def interior_blocks(A_bar, n_interior):
    """Split the interior rows into the square block and the boundary coupling."""
    A_bar = sp.csr_matrix(A_bar)
    top = A_bar[:n_interior]
    return top[:, :n_interior].tocsr(), top[:, n_interior:].tocsr()


def write_matrix_market(path, A):
    scipy.io.mmwrite(str(path), sp.coo_matrix(A), precision=17)


def write_load_vector(path, d):
    with open(path, "w") as fh:
        fh.write("node,d\n")
        for i, value in enumerate(np.asarray(d, dtype=float).tolist()):
            fh.write(f"{i},{value!r}\n")
