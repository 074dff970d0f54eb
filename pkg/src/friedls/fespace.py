"""Tensor-product continuous Lagrange spaces (degree 1 or 2) on structured meshes.

Scalar degrees of freedom live on the (nx*k+1) x (ny*k+1) tensor node grid,
indexed row-major with the x-node index fastest.  Block-valued spaces store
the components of one scalar node contiguously (global index = scalar_dof *
n_components + component), which fixes a deterministic matrix ordering.
All fields are C0-conforming, hence members of every graph space used here.
"""

import numpy as np

from .errors import ConfigError
from .expr import evaluate

_SIDE_AXIS = {"left": (0, -1.0), "right": (0, 1.0),
              "bottom": (1, -1.0), "top": (1, 1.0)}


def lagrange_nodes_1d(degree):
    if degree == 1:
        return np.array([-1.0, 1.0])
    if degree == 2:
        return np.array([-1.0, 0.0, 1.0])
    raise ConfigError(f"unsupported degree {degree} (need 1 or 2)")


def lagrange_eval_1d(nodes, pts):
    """Values and derivatives of the 1D Lagrange basis at pts.

    Returns arrays of shape (len(pts), len(nodes)).
    """
    pts = np.asarray(pts, dtype=float)
    m, k = len(pts), len(nodes)
    vals = np.ones((m, k))
    ders = np.zeros((m, k))
    for j in range(k):
        for i in range(k):
            if i == j:
                continue
            vals[:, j] *= (pts - nodes[i]) / (nodes[j] - nodes[i])
        for i in range(k):
            if i == j:
                continue
            term = np.ones(m) / (nodes[j] - nodes[i])
            for l in range(k):
                if l in (i, j):
                    continue
                term *= (pts - nodes[l]) / (nodes[j] - nodes[l])
            ders[:, j] += term
    return vals, ders


class FeSpace:
    """Continuous scalar or block tensor-product Lagrange space."""

    def __init__(self, mesh, degree, n_components=1):
        if degree not in (1, 2):
            raise ConfigError(f"unsupported degree {degree} (need 1 or 2)")
        self.mesh = mesh
        self.degree = degree
        self.n_components = n_components
        self.nodes_x = mesh.nx * degree + 1
        self.nodes_y = mesh.ny * degree + 1
        self.n_scalar_dofs = self.nodes_x * self.nodes_y
        self.n_dofs = self.n_scalar_dofs * n_components
        self.n_local = (degree + 1) ** 2
        self._ref_nodes = lagrange_nodes_1d(degree)
        self._cell_dofs = self._build_cell_dofs()

    def _build_cell_dofs(self):
        k = self.degree
        cells = np.empty((self.mesh.n_cells, self.n_local), dtype=np.int64)
        local_a, local_b = np.meshgrid(np.arange(k + 1), np.arange(k + 1),
                                       indexing="xy")
        local_a = local_a.ravel()
        local_b = local_b.ravel()
        for iy in range(self.mesh.ny):
            for ix in range(self.mesh.nx):
                c = self.mesh.cell_index(ix, iy)
                cells[c] = (ix * k + local_a) + self.nodes_x * (iy * k + local_b)
        return cells

    def cell_dofs(self, cell):
        """Scalar dof indices of one cell, local x-index fastest."""
        return self._cell_dofs[cell]

    @property
    def cell_dofs_array(self):
        return self._cell_dofs

    def node_coords(self):
        x0, _, y0, _ = self.mesh.extent
        dx = self.mesh.hx / self.degree
        dy = self.mesh.hy / self.degree
        nx_coords = x0 + np.arange(self.nodes_x) * dx
        ny_coords = y0 + np.arange(self.nodes_y) * dy
        gx, gy = np.meshgrid(nx_coords, ny_coords, indexing="xy")
        return np.column_stack([gx.ravel(), gy.ravel()])

    def tabulate(self, rule):
        """Basis values (nq, n_local) and physical gradients (nq, n_local, 2).

        The cell map is affine with a diagonal Jacobian, so one tabulation
        serves every cell of the mesh.
        """
        pts = rule.points if rule.dim == 2 else np.column_stack([rule.points,
                                                                 rule.points])
        vx, dx = lagrange_eval_1d(self._ref_nodes, pts[:, 0])
        vy, dy = lagrange_eval_1d(self._ref_nodes, pts[:, 1])
        k1 = self.degree + 1
        nq = pts.shape[0]
        vals = np.empty((nq, self.n_local))
        grads = np.empty((nq, self.n_local, 2))
        for b in range(k1):
            for a in range(k1):
                l = a + k1 * b
                vals[:, l] = vx[:, a] * vy[:, b]
                grads[:, l, 0] = dx[:, a] * vy[:, b] * (2.0 / self.mesh.hx)
                grads[:, l, 1] = vx[:, a] * dy[:, b] * (2.0 / self.mesh.hy)
        return vals, grads

    def tabulate_side(self, side, rule1d):
        """Basis values (nq, n_local) on one reference side of a cell."""
        axis, coord = _SIDE_AXIS[side]
        nq = len(rule1d.points)
        pts = np.empty((nq, 2))
        pts[:, axis] = coord
        pts[:, 1 - axis] = rule1d.points
        vx, _ = lagrange_eval_1d(self._ref_nodes, pts[:, 0])
        vy, _ = lagrange_eval_1d(self._ref_nodes, pts[:, 1])
        k1 = self.degree + 1
        vals = np.empty((nq, self.n_local))
        for b in range(k1):
            for a in range(k1):
                vals[:, a + k1 * b] = vx[:, a] * vy[:, b]
        return vals

    def quad_points(self, rule):
        """Physical quadrature points (n_cells, nq, 2) and weights (nq,)."""
        origins = self.mesh.cell_origins()
        local = 0.5 * (rule.points + 1.0)
        px = origins[:, 0][:, None] + local[None, :, 0] * self.mesh.hx
        py = origins[:, 1][:, None] + local[None, :, 1] * self.mesh.hy
        weights = rule.weights * (self.mesh.hx * self.mesh.hy / 4.0)
        return np.stack([px, py], axis=-1), weights


class FeFunction:
    """Coefficient vector over a space; components stored per scalar dof."""

    def __init__(self, space, coeffs=None):
        self.space = space
        if coeffs is None:
            coeffs = np.zeros(space.n_dofs)
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (space.n_dofs,):
            raise ConfigError(
                f"coefficient length {coeffs.shape} != dof count {space.n_dofs}")
        self.coeffs = coeffs

    def component(self, c):
        """View of component c as a scalar coefficient vector."""
        return self.coeffs[c::self.space.n_components]

    def cell_values(self, tab_vals, component=0):
        """Values at tabulated points for all cells: (n_cells, nq)."""
        comp = self.component(component)
        return np.einsum("ql,cl->cq", tab_vals, comp[self.space.cell_dofs_array])

    def cell_gradients(self, tab_grads, component=0):
        """Gradients at tabulated points for all cells: (n_cells, nq, 2)."""
        comp = self.component(component)
        return np.einsum("qld,cl->cqd", tab_grads, comp[self.space.cell_dofs_array])


def interpolate(space, fns):
    """Nodal interpolant of one expression per component.

    Expressions see (x, y); for space-time problems the mesh's second axis
    is passed as t as well so data written in terms of t also works.
    """
    if not isinstance(fns, (list, tuple)):
        fns = [fns]
    if len(fns) != space.n_components:
        raise ConfigError(f"need {space.n_components} expressions, got {len(fns)}")
    coords = space.node_coords()
    coeffs = np.empty(space.n_dofs)
    for c, fn in enumerate(fns):
        vals = evaluate(fn, coords[:, 0], coords[:, 1], coords[:, 1])
        coeffs[c::space.n_components] = np.broadcast_to(vals, (space.n_scalar_dofs,))
    return FeFunction(space, coeffs)


def eval_basis(space, cell, rule):
    """Values and physical gradients of all local basis functions.

    The mesh is uniform, so the result does not depend on the cell index;
    the argument is kept for interface symmetry and validated.
    """
    if not 0 <= cell < space.mesh.n_cells:
        raise ConfigError(f"cell {cell} out of range")
    return space.tabulate(rule)


def facet_trace(space, facet, rule1d):
    """Local basis values at the quadrature points of a boundary facet."""
    return space.tabulate_side(facet.side, rule1d)


def scatter_matrix(dim, dofs, local, rows_out, cols_out, vals_out):
    """Append COO triplets of per-cell local matrices.

    dofs: (nc, nl) global indices; local: (nc, nl, nl) or (nl, nl) shared.
    """
    nc, nl = dofs.shape
    if local.ndim == 2:
        local = np.broadcast_to(local, (nc, nl, nl))
    rows_out.append(np.repeat(dofs, nl, axis=1).ravel())
    cols_out.append(np.tile(dofs, (1, nl)).ravel())
    vals_out.append(np.ascontiguousarray(local).ravel())


def scatter_vector(vec, dofs, local):
    """Accumulate per-cell local vectors (nc, nl) into the global vector."""
    np.add.at(vec, dofs.ravel(), local.ravel())


def block_dofs(space, scalar_dofs):
    """Expand scalar dof indices to block indices, component fastest."""
    ncomp = space.n_components
    if ncomp == 1:
        return scalar_dofs
    expanded = scalar_dofs[..., None] * ncomp + np.arange(ncomp)
    return expanded.reshape(*scalar_dofs.shape[:-1], -1)
