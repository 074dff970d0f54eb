"""Structured tensor-product meshes of a rectangle with classified boundary.

The rectangle is either a spatial domain or a space-time slab (second axis
= time).  Cells are indexed row-major with the first axis fastest; facets
are emitted side by side in the fixed order left, right, bottom, top so
that all downstream assembly is reproducible.
"""

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import ClassificationError, ConfigError
from .expr import evaluate
from .quadrature import gauss_rule


class BoundaryTag(Enum):
    INFLOW = "inflow"
    OUTFLOW = "outflow"
    TANGENTIAL = "tangential"
    ROBIN = "robin"
    SIGMA = "sigma"
    Q0 = "q0"
    QTAU = "qtau"


SIDES = ("left", "right", "bottom", "top")

_NORMALS = {
    "left": np.array([-1.0, 0.0]),
    "right": np.array([1.0, 0.0]),
    "bottom": np.array([0.0, -1.0]),
    "top": np.array([0.0, 1.0]),
}


@dataclass(frozen=True)
class BoundaryFacet:
    cell: int
    side: str
    normal: np.ndarray
    measure: float
    p0: np.ndarray
    p1: np.ndarray
    tag: BoundaryTag | None = None

    def quad_points(self, rule1d):
        """Physical quadrature points (nq,2) and weights (nq,) on the facet."""
        s = 0.5 * (rule1d.points + 1.0)
        points = self.p0[None, :] + s[:, None] * (self.p1 - self.p0)[None, :]
        weights = rule1d.weights * (self.measure / 2.0)
        return points, weights


class StructuredMesh2D:
    """Uniform nx-by-ny quadrilateral mesh of [x0,x1] x [y0,y1]."""

    def __init__(self, nx, ny, extent):
        x0, x1, y0, y1 = extent
        if nx < 1 or ny < 1:
            raise ConfigError(f"cell counts must be >= 1, got {nx}x{ny}")
        if not (x1 > x0 and y1 > y0):
            raise ConfigError(f"degenerate extent {extent}")
        self.nx = int(nx)
        self.ny = int(ny)
        self.extent = (float(x0), float(x1), float(y0), float(y1))
        self.hx = (x1 - x0) / nx
        self.hy = (y1 - y0) / ny
        self.n_cells = self.nx * self.ny

    @property
    def h(self):
        return (self.hx, self.hy)

    def cell_origins(self):
        """Lower-left corner of every cell, shape (n_cells, 2)."""
        x0, _, y0, _ = self.extent
        ix = np.arange(self.nx)
        iy = np.arange(self.ny)
        ox = x0 + ix * self.hx
        oy = y0 + iy * self.hy
        gx, gy = np.meshgrid(ox, oy, indexing="xy")
        return np.column_stack([gx.ravel(), gy.ravel()])

    def vertices(self):
        x0, _, y0, _ = self.extent
        vx = x0 + np.arange(self.nx + 1) * self.hx
        vy = y0 + np.arange(self.ny + 1) * self.hy
        gx, gy = np.meshgrid(vx, vy, indexing="xy")
        return np.column_stack([gx.ravel(), gy.ravel()])

    def cell_index(self, ix, iy):
        return ix + self.nx * iy

    def refine(self):
        """Halve both cell sizes; the parent's vertex set nests in the child's."""
        return StructuredMesh2D(2 * self.nx, 2 * self.ny, self.extent)

    def boundary_facets(self):
        """Untagged facets, ordered left, right, bottom, top."""
        x0, x1, y0, y1 = self.extent
        facets = []
        for iy in range(self.ny):
            a, b = y0 + iy * self.hy, y0 + (iy + 1) * self.hy
            facets.append(BoundaryFacet(self.cell_index(0, iy), "left",
                                        _NORMALS["left"], self.hy,
                                        np.array([x0, a]), np.array([x0, b])))
        for iy in range(self.ny):
            a, b = y0 + iy * self.hy, y0 + (iy + 1) * self.hy
            facets.append(BoundaryFacet(self.cell_index(self.nx - 1, iy), "right",
                                        _NORMALS["right"], self.hy,
                                        np.array([x1, a]), np.array([x1, b])))
        for ix in range(self.nx):
            a, b = x0 + ix * self.hx, x0 + (ix + 1) * self.hx
            facets.append(BoundaryFacet(self.cell_index(ix, 0), "bottom",
                                        _NORMALS["bottom"], self.hx,
                                        np.array([a, y0]), np.array([b, y0])))
        for ix in range(self.nx):
            a, b = x0 + ix * self.hx, x0 + (ix + 1) * self.hx
            facets.append(BoundaryFacet(self.cell_index(ix, self.ny - 1), "top",
                                        _NORMALS["top"], self.hx,
                                        np.array([a, y1]), np.array([b, y1])))
        return facets


def build_mesh(nx, ny, extent):
    return StructuredMesh2D(nx, ny, extent)


def classify_boundary_advection(mesh, beta, tol=1e-12, quad_points=4):
    """Tag facets inflow/outflow/tangential by the sign of n.beta.

    beta is a pair of expressions.  The sign test is relative to the max
    norm of beta over all facet quadrature points; a facet where n.beta
    changes sign beyond that tolerance is rejected (refine or align the
    mesh with the sign change instead of splitting the facet).
    """
    rule = gauss_rule(quad_points, 1)
    facets = mesh.boundary_facets()
    values = []
    bmax = 0.0
    for facet in facets:
        points, _ = facet.quad_points(rule)
        bx = np.broadcast_to(evaluate(beta[0], points[:, 0], points[:, 1]), points[:, 0].shape)
        by = np.broadcast_to(evaluate(beta[1], points[:, 0], points[:, 1]), points[:, 0].shape)
        values.append(facet.normal[0] * bx + facet.normal[1] * by)
        bmax = max(bmax, np.abs(bx).max(), np.abs(by).max())
    threshold = tol * bmax
    tagged = []
    for facet, nb in zip(facets, values):
        if np.all(nb < -threshold):
            tag = BoundaryTag.INFLOW
        elif np.all(nb > threshold):
            tag = BoundaryTag.OUTFLOW
        elif np.any(nb < -threshold) and np.any(nb > threshold):
            raise ClassificationError(
                f"n.beta changes sign on the {facet.side} facet of cell "
                f"{facet.cell}; refine the mesh or align it with the sign change")
        else:
            tag = BoundaryTag.TANGENTIAL
        tagged.append(replace(facet, tag=tag))
    return tagged


def classify_boundary_wave(mesh):
    """Space-time slab tagging: lateral sides, initial face, final face."""
    tags = {"left": BoundaryTag.SIGMA, "right": BoundaryTag.SIGMA,
            "bottom": BoundaryTag.Q0, "top": BoundaryTag.QTAU}
    return [replace(f, tag=tags[f.side]) for f in mesh.boundary_facets()]


def classify_boundary_robin(mesh):
    return [replace(f, tag=BoundaryTag.ROBIN) for f in mesh.boundary_facets()]


def _segment_distance(p0, p1, q0, q1):
    """Euclidean distance between two closed 2D segments."""
    def point_segment(p, a, b):
        d = b - a
        denom = float(d @ d)
        s = 0.0 if denom == 0.0 else np.clip((p - a) @ d / denom, 0.0, 1.0)
        return float(np.linalg.norm(p - (a + s * d)))

    # axis-aligned facets never properly intersect unless they touch,
    # which the endpoint checks below detect
    return min(point_segment(p0, q0, q1), point_segment(p1, q0, q1),
               point_segment(q0, p0, p1), point_segment(q1, p0, p1))


def min_tag_distance(facets, tag_a, tag_b):
    """Smallest distance between the facet sets carrying two tags."""
    set_a = [f for f in facets if f.tag is tag_a]
    set_b = [f for f in facets if f.tag is tag_b]
    if not set_a or not set_b:
        return np.inf
    return min(_segment_distance(fa.p0, fa.p1, fb.p0, fb.p1)
               for fa in set_a for fb in set_b)


def tag_measure(facets, tag):
    return sum(f.measure for f in facets if f.tag is tag)
