"""Elliptic model problem in first-order form with an interpolated Robin trace.

Unknown block xi = (xi1, xi2) with a vector part xi1 (two components) and a
scalar part xi2; the operator acts as

    (T xi)_1 = xi1 + grad(xi2),      (T xi)_2 = xi2 + div(xi1),

and the boundary condition combines xi2 and n.xi1 through the weight
alpha(x) with |alpha| <= alpha_M < 1.  The test space is
L2(domain)^3 x L2(boundary), so the residual dual norm is

    R(xi) = ||T xi - f||^2  +  ||tr_alpha xi - sqrt(2) g||^2_boundary,

with tr_alpha xi = [(1-alpha) xi2 - (1+alpha) n.xi1] / sqrt(2).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .expr import evaluate
from .fespace import block_dofs, scatter_matrix, scatter_vector
from .linalg import AssembledSystem, SymMatrix
from .mesh import classify_boundary_robin
from .quadrature import gauss_rule

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class EllipticProblem:
    mesh: object
    alpha: object
    alpha_m: float
    f: tuple
    g: object
    facets: list


def make_elliptic_problem(mesh, alpha, alpha_m, f, g, check_points=4):
    """Validate |alpha| <= alpha_M < 1 on the boundary and tag facets."""
    if not 0.0 <= alpha_m < 1.0:
        raise ConfigError(f"alpha_m must lie in [0, 1), got {alpha_m}")
    facets = classify_boundary_robin(mesh)
    rule = gauss_rule(check_points, 1)
    for facet in facets:
        pts, _ = facet.quad_points(rule)
        av = np.broadcast_to(evaluate(alpha, pts[:, 0], pts[:, 1]),
                             pts[:, 0].shape)
        if np.abs(av).max() > alpha_m + 1e-12:
            raise ConfigError(
                f"|alpha| reaches {np.abs(av).max():.6g} > alpha_m = {alpha_m} "
                "on the boundary (pure Dirichlet/Neumann is excluded)")
    return EllipticProblem(mesh, alpha, alpha_m, tuple(f), g, facets)


def _block_tables(space, rule):
    """Identity and operator tables of the block basis.

    Returns VB (nq, nlb, 3) with component placement of each local basis
    function and TB (nq, nlb, 3) with its image under the block operator;
    both are cell independent on a uniform mesh.
    """
    vals, grads = space.tabulate(rule)
    nq, nl = vals.shape
    nlb = nl * 3
    VB = np.zeros((nq, nlb, 3))
    TB = np.zeros((nq, nlb, 3))
    for l in range(nl):
        VB[:, l * 3 + 0, 0] = vals[:, l]
        VB[:, l * 3 + 1, 1] = vals[:, l]
        VB[:, l * 3 + 2, 2] = vals[:, l]
        # vector-part basis: identity in its own slot plus divergence
        TB[:, l * 3 + 0, 0] = vals[:, l]
        TB[:, l * 3 + 0, 2] = grads[:, l, 0]
        TB[:, l * 3 + 1, 1] = vals[:, l]
        TB[:, l * 3 + 1, 2] = grads[:, l, 1]
        # scalar-part basis: gradient feeds the vector rows
        TB[:, l * 3 + 2, 0] = grads[:, l, 0]
        TB[:, l * 3 + 2, 1] = grads[:, l, 1]
        TB[:, l * 3 + 2, 2] = vals[:, l]
    return VB, TB


def _facet_tables(problem, space, facet, rule1d):
    """Robin-trace and normal-trace tables on one facet: (nq, nlb) each."""
    trace = space.tabulate_side(facet.side, rule1d)
    pts, wts = facet.quad_points(rule1d)
    av = np.broadcast_to(evaluate(problem.alpha, pts[:, 0], pts[:, 1]),
                         pts[:, 0].shape)
    nq, nl = trace.shape
    nlb = nl * 3
    tr_a = np.zeros((nq, nlb))
    tr_a_star = np.zeros((nq, nlb))
    normal_tr = np.zeros((nq, nlb))
    nx, ny = facet.normal
    for l in range(nl):
        tr_a[:, l * 3 + 0] = -(1.0 + av) * nx * trace[:, l] / SQRT2
        tr_a[:, l * 3 + 1] = -(1.0 + av) * ny * trace[:, l] / SQRT2
        tr_a[:, l * 3 + 2] = (1.0 - av) * trace[:, l] / SQRT2
        tr_a_star[:, l * 3 + 0] = (1.0 + av) * nx * trace[:, l] / SQRT2
        tr_a_star[:, l * 3 + 1] = (1.0 + av) * ny * trace[:, l] / SQRT2
        tr_a_star[:, l * 3 + 2] = (1.0 - av) * trace[:, l] / SQRT2
        normal_tr[:, l * 3 + 0] = nx * trace[:, l]
        normal_tr[:, l * 3 + 1] = ny * trace[:, l]
    return {"trace": trace, "pts": pts, "wts": wts, "alpha": av,
            "tr_a": tr_a, "tr_a_star": tr_a_star, "normal": normal_tr}


def apply_block(problem, xi, cell, rule, adjoint=False):
    """Pointwise block-operator values (nq, 3) on one cell."""
    space = xi.space
    vals, grads = space.tabulate(rule)
    dofs = space.cell_dofs(cell)
    sign = -1.0 if adjoint else 1.0
    comp = [xi.component(c)[dofs] for c in range(3)]
    v = [vals @ comp[c] for c in range(3)]
    g0 = grads[:, :, 0]
    g1 = grads[:, :, 1]
    out = np.empty((vals.shape[0], 3))
    out[:, 0] = v[0] + sign * (g0 @ comp[2])
    out[:, 1] = v[1] + sign * (g1 @ comp[2])
    out[:, 2] = v[2] + sign * (g0 @ comp[0] + g1 @ comp[1])
    return out


def robin_trace(problem, xi, facet, rule1d, adjoint=False):
    """Pointwise tr_alpha (or its adjoint twin) of xi on a facet."""
    space = xi.space
    tables = _facet_tables(problem, space, facet, rule1d)
    dofs = block_dofs(space, space.cell_dofs(facet.cell))
    table = tables["tr_a_star"] if adjoint else tables["tr_a"]
    return table @ xi.coeffs[dofs]


def assemble_wellposed(problem, space, quad_order=None):
    if space.n_components != 3:
        raise ConfigError("elliptic block space needs 3 components")
    order = quad_order or space.degree + 2
    rule = gauss_rule(order, 2)
    VB, TB = _block_tables(space, rule)
    pts, w = space.quad_points(rule)
    X, Y = pts[..., 0], pts[..., 1]

    b_loc = np.einsum("q,qir,qjr->ij", w, TB, TB, optimize=True)
    m_loc = np.einsum("q,qir,qjr->ij", w, VB, VB, optimize=True) + b_loc

    fv = np.stack([np.broadcast_to(evaluate(fc, X, Y), X.shape)
                   for fc in problem.f], axis=-1)
    rhs = np.zeros(space.n_dofs)
    dofs = block_dofs(space, space.cell_dofs_array)
    scatter_vector(rhs, dofs, np.einsum("q,cqr,qir->ci", w, fv, TB,
                                        optimize=True))
    load_sq = float(np.einsum("q,cqr,cqr->", w, fv, fv))

    rows_b, cols_b, vals_b = [], [], []
    rows_m, cols_m, vals_m = [], [], []
    scatter_matrix(space.n_dofs, dofs, b_loc, rows_b, cols_b, vals_b)
    scatter_matrix(space.n_dofs, dofs, m_loc, rows_m, cols_m, vals_m)

    rule1d = gauss_rule(order, 1)
    for facet in problem.facets:
        tables = _facet_tables(problem, space, facet, rule1d)
        wts, tr_a, normal = tables["wts"], tables["tr_a"], tables["normal"]
        gv = np.broadcast_to(evaluate(problem.g, tables["pts"][:, 0],
                                      tables["pts"][:, 1]),
                             tables["pts"][:, 0].shape)
        fdofs = block_dofs(space, space.cell_dofs(facet.cell))[None, :]
        local_b = np.einsum("q,qi,qj->ij", wts, tr_a, tr_a)
        local_m = np.einsum("q,qi,qj->ij", wts, normal, normal)
        scatter_matrix(space.n_dofs, fdofs, local_b[None], rows_b, cols_b, vals_b)
        scatter_matrix(space.n_dofs, fdofs, local_m[None], rows_m, cols_m, vals_m)
        scatter_vector(rhs, fdofs,
                       (SQRT2 * np.einsum("q,q,qi->i", wts, gv, tr_a))[None])
        load_sq += 2.0 * float(wts @ (gv * gv))

    operator = SymMatrix.from_coo(space.n_dofs, rows_b, cols_b, vals_b)
    gram = SymMatrix.from_coo(space.n_dofs, rows_m, cols_m, vals_m)
    return AssembledSystem(operator, rhs, load_sq, gram)


def _block_fields(space, xi, rule):
    vals, grads = space.tabulate(rule)
    dofs = space.cell_dofs_array
    comp = [xi.component(c)[dofs] for c in range(3)]
    v = np.stack([np.einsum("ql,cl->cq", vals, comp[c]) for c in range(3)],
                 axis=-1)
    t = np.empty_like(v)
    g = [np.einsum("qld,cl->cqd", grads, comp[c]) for c in range(3)]
    t[..., 0] = v[..., 0] + g[2][..., 0]
    t[..., 1] = v[..., 1] + g[2][..., 1]
    t[..., 2] = v[..., 2] + g[0][..., 0] + g[1][..., 1]
    return v, t


def ibp_residual(problem, space, xi, quad_order=None):
    """|int xi.T(xi) - (int |xi|^2 + boundary n.xi1 xi2)| by quadrature."""
    order = quad_order or space.degree + 2
    rule = gauss_rule(order, 2)
    _, w = space.quad_points(rule)
    v, t = _block_fields(space, xi, rule)
    lhs = float(np.einsum("q,cqr,cqr->", w, v, t))
    rhs = float(np.einsum("q,cqr,cqr->", w, v, v))
    rule1d = gauss_rule(order, 1)
    for facet in problem.facets:
        tables = _facet_tables(problem, space, facet, rule1d)
        dofs = block_dofs(space, space.cell_dofs(facet.cell))
        xb = xi.coeffs[dofs]
        gn = tables["normal"] @ xb
        x2 = tables["trace"] @ xi.component(2)[space.cell_dofs(facet.cell)]
        rhs += float(tables["wts"] @ (gn * x2))
    return abs(lhs - rhs), lhs, rhs


def adjoint_residual(problem, space, xi, eta, quad_order=None):
    """|a(eta_hat, xi) - a*(xi_hat, eta)| with the centered trace tuples.

    The tuples carry the alpha=0 traces: eta_hat = (eta, tr_0 eta) and
    xi_hat = (xi, tr*_0 xi); the forms themselves carry tr_alpha.
    """
    order = quad_order or space.degree + 2
    rule = gauss_rule(order, 2)
    _, w = space.quad_points(rule)
    xv, xt = _block_fields(space, xi, rule)
    ev, et = _block_fields(space, eta, rule)
    # T-tilde values follow from T: (T~ u) = 2u - Tu componentwise
    et_adj = 2.0 * ev - et
    a_val = float(np.einsum("q,cqr,cqr->", w, ev, xt))
    a_star = float(np.einsum("q,cqr,cqr->", w, xv, et_adj))
    rule1d = gauss_rule(order, 1)
    for facet in problem.facets:
        tables = _facet_tables(problem, space, facet, rule1d)
        dofs = block_dofs(space, space.cell_dofs(facet.cell))
        xb, eb = xi.coeffs[dofs], eta.coeffs[dofs]
        gn_x = tables["normal"] @ xb
        gn_e = tables["normal"] @ eb
        scalar_dofs = space.cell_dofs(facet.cell)
        x2 = tables["trace"] @ xi.component(2)[scalar_dofs]
        e2 = tables["trace"] @ eta.component(2)[scalar_dofs]
        tr0_eta = (e2 - gn_e) / SQRT2
        tr0_star_xi = (x2 + gn_x) / SQRT2
        a_val += float(tables["wts"] @ (tr0_eta * (tables["tr_a"] @ xb)))
        a_star += float(tables["wts"] @ (tr0_star_xi * (tables["tr_a_star"] @ eb)))
    return abs(a_val - a_star), a_val, a_star


def lower_bound_split(problem, space, xi, system=None, quad_order=None):
    """Data-free residual norm vs the certified multiple of the L2+trace norm.

    Returns (sqrt(R0(xi)), (1-alpha_M)/2 * sqrt(||xi||^2 + ||n.xi1||^2)).
    """
    order = quad_order or space.degree + 2
    if system is None:
        system = assemble_wellposed(problem, space, quad_order)
    r0 = float(xi.coeffs @ system.operator.matvec(xi.coeffs))
    rule = gauss_rule(order, 2)
    _, w = space.quad_points(rule)
    v, _ = _block_fields(space, xi, rule)
    base = float(np.einsum("q,cqr,cqr->", w, v, v))
    rule1d = gauss_rule(order, 1)
    for facet in problem.facets:
        tables = _facet_tables(problem, space, facet, rule1d)
        dofs = block_dofs(space, space.cell_dofs(facet.cell))
        gn = tables["normal"] @ xi.coeffs[dofs]
        base += float(tables["wts"] @ (gn * gn))
    bound = 0.5 * (1.0 - problem.alpha_m) * np.sqrt(base)
    return np.sqrt(max(r0, 0.0)), bound


def residual_norm_direct(problem, space, xi, quad_order=None):
    """Dual norm of the residual evaluated pointwise (no cancellation)."""
    order = quad_order or space.degree + 2
    rule = gauss_rule(order, 2)
    pts, w = space.quad_points(rule)
    X, Y = pts[..., 0], pts[..., 1]
    _, t = _block_fields(space, xi, rule)
    fv = np.stack([np.broadcast_to(evaluate(fc, X, Y), X.shape)
                   for fc in problem.f], axis=-1)
    r = t - fv
    total = float(np.einsum("q,cqr,cqr->", w, r, r))
    rule1d = gauss_rule(order, 1)
    for facet in problem.facets:
        tables = _facet_tables(problem, space, facet, rule1d)
        dofs = block_dofs(space, space.cell_dofs(facet.cell))
        tr = tables["tr_a"] @ xi.coeffs[dofs]
        gv = np.broadcast_to(evaluate(problem.g, tables["pts"][:, 0],
                                      tables["pts"][:, 1]),
                             tables["pts"][:, 0].shape)
        total += float(tables["wts"] @ ((tr - SQRT2 * gv) ** 2))
    return float(np.sqrt(max(total, 0.0)))


def error_norms(problem, space, xi, exact, quad_order=None):
    """L2 and solution-norm errors against manufactured exact components.

    exact is a triple of expressions (vector part, scalar part); the
    operator image of the exact solution is recovered from the data f.
    """
    order = quad_order or space.degree + 3
    rule = gauss_rule(order, 2)
    pts, w = space.quad_points(rule)
    X, Y = pts[..., 0], pts[..., 1]
    v, t = _block_fields(space, xi, rule)
    ev = np.stack([np.broadcast_to(evaluate(ec, X, Y), X.shape)
                   for ec in exact], axis=-1)
    fv = np.stack([np.broadcast_to(evaluate(fc, X, Y), X.shape)
                   for fc in problem.f], axis=-1)
    diff = v - ev
    tdiff = t - fv
    err_l2_sq = float(np.einsum("q,cqr,cqr->", w, diff, diff))
    err_v_sq = err_l2_sq + float(np.einsum("q,cqr,cqr->", w, tdiff, tdiff))
    rule1d = gauss_rule(order, 1)
    for facet in problem.facets:
        tables = _facet_tables(problem, space, facet, rule1d)
        dofs = block_dofs(space, space.cell_dofs(facet.cell))
        gn_h = tables["normal"] @ xi.coeffs[dofs]
        p = tables["pts"]
        e1x = np.broadcast_to(evaluate(exact[0], p[:, 0], p[:, 1]), p[:, 0].shape)
        e1y = np.broadcast_to(evaluate(exact[1], p[:, 0], p[:, 1]), p[:, 0].shape)
        gn_e = facet.normal[0] * e1x + facet.normal[1] * e1y
        err_v_sq += float(tables["wts"] @ ((gn_h - gn_e) ** 2))
    return float(np.sqrt(err_l2_sq)), float(np.sqrt(err_v_sq))
