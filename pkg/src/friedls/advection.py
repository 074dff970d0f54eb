"""Steady advection-reaction: residual minimization and diagnostics.

The transport operator is T u = beta.grad(u) + rho*u on the unit square
(or any rectangle) with a divergence-free field beta and rho >= rho0 > 0.
Because the test space is L2(domain) x L2(inflow; |n.beta|), the dual norm
of the residual has the closed form

    R(u) = int rho^-1 (Tu - f)^2  +  int_inflow |n.beta| (u - g)^2,

so the discrete problem is the SPD normal-equation system of minimizing R
over the FE space.  The module also assembles the naive single-space form
a0 whose sup-ratio decay over oscillatory modes demonstrates that a0 does
not control the graph norm.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ResolutionError
from .expr import evaluate, parse
from .fespace import FeFunction, interpolate, scatter_matrix, scatter_vector
from .linalg import DENSE_LIMIT, AssembledSystem, SymMatrix, spd_solve
from .mesh import BoundaryTag, classify_boundary_advection, min_tag_distance
from .quadrature import gauss_rule

DIV_TOL = 1e-6


@dataclass(frozen=True)
class AdvectionProblem:
    mesh: object
    beta: tuple
    rho: object
    rho0: float
    f: object
    g: object
    facets: list


def make_advection_problem(mesh, beta, rho, rho0, f, g,
                           classify_tol=1e-12, check_points=4):
    """Validate coefficients and classify the boundary.

    Checks, by sampling at quadrature points: rho >= rho0 > 0, div(beta)=0
    (central differences), and that the inflow and outflow boundary parts
    do not touch.
    """
    if rho0 <= 0:
        raise ConfigError(f"rho0 must be positive, got {rho0}")
    rule = gauss_rule(check_points, 2)
    origins = mesh.cell_origins()
    local = 0.5 * (rule.points + 1.0)
    X = origins[:, 0][:, None] + local[None, :, 0] * mesh.hx
    Y = origins[:, 1][:, None] + local[None, :, 1] * mesh.hy
    rho_vals = np.broadcast_to(evaluate(rho, X, Y), X.shape)
    if rho_vals.min() < rho0 - 1e-12 * max(1.0, abs(rho0)):
        raise ConfigError(
            f"rho dips to {rho_vals.min():.6g} below the floor rho0 = {rho0}")

    bx = np.broadcast_to(evaluate(beta[0], X, Y), X.shape)
    by = np.broadcast_to(evaluate(beta[1], X, Y), X.shape)
    bmax = max(np.abs(bx).max(), np.abs(by).max())
    if bmax > 0:
        delta = 1e-6 * (1.0 + np.abs(X))
        div = (evaluate(beta[0], X + delta, Y) - evaluate(beta[0], X - delta, Y)) \
            / (2.0 * delta)
        delta = 1e-6 * (1.0 + np.abs(Y))
        div = div + (evaluate(beta[1], X, Y + delta) - evaluate(beta[1], X, Y - delta)) \
            / (2.0 * delta)
        allowed = DIV_TOL * bmax / min(mesh.hx, mesh.hy)
        if np.abs(div).max() > allowed:
            raise ConfigError(
                f"div(beta) = {np.abs(div).max():.3e} exceeds {allowed:.3e}; "
                "the field must be divergence free")

    facets = classify_boundary_advection(mesh, beta, tol=classify_tol,
                                         quad_points=check_points)
    gap = min_tag_distance(facets, BoundaryTag.INFLOW, BoundaryTag.OUTFLOW)
    if gap <= 0.0:
        raise ConfigError("inflow and outflow boundary parts touch "
                          "(their distance must be strictly positive)")
    return AdvectionProblem(mesh, tuple(beta), rho, rho0, f, g, facets)


def _coefficients(problem, space, rule):
    """Tabulation plus coefficient arrays at all volume quadrature points."""
    vals, grads = space.tabulate(rule)
    pts, weights = space.quad_points(rule)
    X, Y = pts[..., 0], pts[..., 1]
    shape = X.shape
    bx = np.broadcast_to(evaluate(problem.beta[0], X, Y), shape)
    by = np.broadcast_to(evaluate(problem.beta[1], X, Y), shape)
    rho = np.broadcast_to(evaluate(problem.rho, X, Y), shape)
    stream = np.einsum("cq,qld->cql", bx, grads[:, :, :1]) \
        + np.einsum("cq,qld->cql", by, grads[:, :, 1:])
    transport = stream + np.einsum("cq,ql->cql", rho, vals)
    return {"vals": vals, "grads": grads, "X": X, "Y": Y, "w": weights,
            "bx": bx, "by": by, "rho": rho, "stream": stream,
            "transport": transport}


def _facet_data(problem, space, facet, rule1d):
    trace = space.tabulate_side(facet.side, rule1d)
    pts, wts = facet.quad_points(rule1d)
    bx = evaluate(problem.beta[0], pts[:, 0], pts[:, 1])
    by = evaluate(problem.beta[1], pts[:, 0], pts[:, 1])
    nb = facet.normal[0] * bx + facet.normal[1] * by
    return trace, pts, wts, np.broadcast_to(nb, pts[:, 0].shape)


def transport_apply(problem, u, cell, rule, adjoint=False):
    """Pointwise (beta.grad + rho) u, or the formal adjoint, on one cell."""
    vals, grads = u.space.tabulate(rule)
    dofs = u.space.cell_dofs(cell)
    coeffs = u.coeffs[dofs]
    pts, _ = u.space.quad_points(rule)
    X, Y = pts[cell, :, 0], pts[cell, :, 1]
    bx = evaluate(problem.beta[0], X, Y)
    by = evaluate(problem.beta[1], X, Y)
    rho = evaluate(problem.rho, X, Y)
    uv = vals @ coeffs
    ux = grads[:, :, 0] @ coeffs
    uy = grads[:, :, 1] @ coeffs
    sign = -1.0 if adjoint else 1.0
    return sign * (bx * ux + by * uy) + rho * uv


def assemble_wellposed(problem, space, quad_order=None):
    """Normal equations of the residual minimization, plus the graph Gram."""
    if space.n_components != 1:
        raise ConfigError("advection space must be scalar")
    order = quad_order or space.degree + 2
    rule = gauss_rule(order, 2)
    ctx = _coefficients(problem, space, rule)
    w, rho, T, S, vals = ctx["w"], ctx["rho"], ctx["transport"], ctx["stream"], ctx["vals"]
    rinv = 1.0 / rho
    fv = np.broadcast_to(evaluate(problem.f, ctx["X"], ctx["Y"]), ctx["X"].shape)

    b_loc = np.einsum("q,cq,cqi,cqj->cij", w, rinv, T, T, optimize=True)
    m_loc = np.einsum("q,cq,qi,qj->cij", w, rho, vals, vals, optimize=True) \
        + np.einsum("q,cqi,cqj->cij", w, S, S, optimize=True)
    rhs = np.zeros(space.n_dofs)
    dofs = space.cell_dofs_array
    scatter_vector(rhs, dofs, np.einsum("q,cq,cq,cqi->ci", w, rinv, fv, T,
                                        optimize=True))
    load_sq = float(np.einsum("q,cq,cq->", w, rinv, fv * fv))

    rows_b, cols_b, vals_b = [], [], []
    rows_m, cols_m, vals_m = [], [], []
    scatter_matrix(space.n_dofs, dofs, b_loc, rows_b, cols_b, vals_b)
    scatter_matrix(space.n_dofs, dofs, m_loc, rows_m, cols_m, vals_m)

    rule1d = gauss_rule(order, 1)
    for facet in problem.facets:
        if facet.tag is not BoundaryTag.INFLOW:
            continue
        trace, pts, wts, nb = _facet_data(problem, space, facet, rule1d)
        weight = wts * np.abs(nb)
        gv = np.broadcast_to(evaluate(problem.g, pts[:, 0], pts[:, 1]),
                             pts[:, 0].shape)
        local = np.einsum("q,qi,qj->ij", weight, trace, trace)
        fdofs = space.cell_dofs(facet.cell)[None, :]
        scatter_matrix(space.n_dofs, fdofs, local[None], rows_b, cols_b, vals_b)
        scatter_vector(rhs, fdofs, np.einsum("q,q,qi->i", weight, gv, trace)[None])
        load_sq += float(weight @ (gv * gv))

    operator = SymMatrix.from_coo(space.n_dofs, rows_b, cols_b, vals_b)
    gram = SymMatrix.from_coo(space.n_dofs, rows_m, cols_m, vals_m)
    return AssembledSystem(operator, rhs, load_sq, gram)


def assemble_illposed(problem, space, quad_order=None):
    """Single-space Galerkin matrix a0 (test index first) and graph Gram."""
    import scipy.sparse as sp

    order = quad_order or space.degree + 2
    rule = gauss_rule(order, 2)
    ctx = _coefficients(problem, space, rule)
    w, rho, T, S, vals = ctx["w"], ctx["rho"], ctx["transport"], ctx["stream"], ctx["vals"]

    a_loc = np.einsum("q,qi,cqj->cij", w, vals, T, optimize=True)
    m_loc = np.einsum("q,cq,qi,qj->cij", w, rho, vals, vals, optimize=True) \
        + np.einsum("q,cqi,cqj->cij", w, S, S, optimize=True)

    dofs = space.cell_dofs_array
    rows_a, cols_a, vals_a = [], [], []
    rows_m, cols_m, vals_m = [], [], []
    scatter_matrix(space.n_dofs, dofs, a_loc, rows_a, cols_a, vals_a)
    scatter_matrix(space.n_dofs, dofs, m_loc, rows_m, cols_m, vals_m)

    rule1d = gauss_rule(order, 1)
    for facet in problem.facets:
        if facet.tag is not BoundaryTag.INFLOW:
            continue
        trace, _, wts, nb = _facet_data(problem, space, facet, rule1d)
        local = np.einsum("q,qi,qj->ij", wts * np.abs(nb), trace, trace)
        fdofs = space.cell_dofs(facet.cell)[None, :]
        scatter_matrix(space.n_dofs, fdofs, local[None], rows_a, cols_a, vals_a)

    a0 = sp.coo_matrix((np.concatenate(vals_a),
                        (np.concatenate(rows_a), np.concatenate(cols_a))),
                       shape=(space.n_dofs, space.n_dofs)).tocsr()
    if space.n_dofs <= DENSE_LIMIT:
        a0 = a0.toarray()
    gram = SymMatrix.from_coo(space.n_dofs, rows_m, cols_m, vals_m)
    return a0, gram


def galerkin_value(a0, u, v):
    """a0(v, u) for assembled a0 (test function first)."""
    return float(v.coeffs @ (a0 @ u.coeffs))


def coercivity_split(problem, space, u, quad_order=None):
    """Return (a0(u,u), rho0*||u||^2 + 0.5*boundary weighted trace^2)."""
    order = quad_order or space.degree + 2
    rule = gauss_rule(order, 2)
    ctx = _coefficients(problem, space, rule)
    uv = u.cell_values(ctx["vals"])
    ug = u.cell_gradients(ctx["grads"])
    tu = ctx["bx"] * ug[..., 0] + ctx["by"] * ug[..., 1] + ctx["rho"] * uv
    a0_uu = float(np.einsum("q,cq,cq->", ctx["w"], uv, tu))
    lower = problem.rho0 * float(np.einsum("q,cq,cq->", ctx["w"], uv, uv))
    rule1d = gauss_rule(order, 1)
    for facet in problem.facets:
        trace, _, wts, nb = _facet_data(problem, space, facet, rule1d)
        ub = trace @ u.coeffs[space.cell_dofs(facet.cell)]
        boundary = float((wts * np.abs(nb)) @ (ub * ub))
        lower += 0.5 * boundary
        if facet.tag is BoundaryTag.INFLOW:
            a0_uu += boundary
    return a0_uu, lower


def adjoint_residual(problem, space, u, v, quad_order=None):
    """|a*(u_hat, v) - a(v_hat, u)| with traces taken on the proper parts."""
    order = quad_order or space.degree + 2
    rule = gauss_rule(order, 2)
    ctx = _coefficients(problem, space, rule)
    uv = u.cell_values(ctx["vals"])
    ug = u.cell_gradients(ctx["grads"])
    vv = v.cell_values(ctx["vals"])
    vg = v.cell_gradients(ctx["grads"])
    tu = ctx["bx"] * ug[..., 0] + ctx["by"] * ug[..., 1] + ctx["rho"] * uv
    tv_adj = -(ctx["bx"] * vg[..., 0] + ctx["by"] * vg[..., 1]) + ctx["rho"] * vv
    a_val = float(np.einsum("q,cq,cq->", ctx["w"], vv, tu))
    a_star = float(np.einsum("q,cq,cq->", ctx["w"], uv, tv_adj))
    rule1d = gauss_rule(order, 1)
    for facet in problem.facets:
        if facet.tag is BoundaryTag.TANGENTIAL:
            continue
        trace, _, wts, nb = _facet_data(problem, space, facet, rule1d)
        dofs = space.cell_dofs(facet.cell)
        ub = trace @ u.coeffs[dofs]
        vb = trace @ v.coeffs[dofs]
        if facet.tag is BoundaryTag.INFLOW:
            a_val -= float((wts * nb) @ (vb * ub))
        else:
            a_star += float((wts * nb) @ (ub * vb))
    return abs(a_star - a_val), a_val, a_star


def compute_norms(problem, space, u, quad_order=None):
    """Weighted L2 norm, graph norm, and the dual norm of the load."""
    order = quad_order or space.degree + 2
    rule = gauss_rule(order, 2)
    ctx = _coefficients(problem, space, rule)
    uv = u.cell_values(ctx["vals"])
    ug = u.cell_gradients(ctx["grads"])
    su = ctx["bx"] * ug[..., 0] + ctx["by"] * ug[..., 1]
    l2_rho_sq = float(np.einsum("q,cq,cq->", ctx["w"], ctx["rho"], uv * uv))
    w_sq = l2_rho_sq + float(np.einsum("q,cq->", ctx["w"], su * su))

    fv = np.broadcast_to(evaluate(problem.f, ctx["X"], ctx["Y"]), ctx["X"].shape)
    load_sq = float(np.einsum("q,cq,cq->", ctx["w"], 1.0 / ctx["rho"], fv * fv))
    rule1d = gauss_rule(order, 1)
    for facet in problem.facets:
        if facet.tag is not BoundaryTag.INFLOW:
            continue
        _, pts, wts, nb = _facet_data(problem, space, facet, rule1d)
        gv = np.broadcast_to(evaluate(problem.g, pts[:, 0], pts[:, 1]),
                             pts[:, 0].shape)
        load_sq += float((wts * np.abs(nb)) @ (gv * gv))
    return {"l2_rho": np.sqrt(l2_rho_sq), "w_norm": np.sqrt(w_sq),
            "l_dual_of_l": np.sqrt(load_sq)}


def plain_l2_norm(space, u, quad_order=None):
    order = quad_order or space.degree + 2
    rule = gauss_rule(order, 2)
    vals, _ = space.tabulate(rule)
    _, w = space.quad_points(rule)
    uv = u.cell_values(vals)
    return float(np.sqrt(np.einsum("q,cq->", w, uv * uv)))


def oscillatory_mode(n):
    """The standing mode sin(n pi x) sin(pi y) as an expression."""
    return parse(f"sin({n}*pi*x)*sin(pi*y)")


def _mode_ratio(problem, space, n, assembled=None, quad_order=None,
                cg_tol=1e-10):
    """Sup ratio of a0 against the interpolated mode n, with its norms."""
    mesh = space.mesh
    if mesh.nx < 2 * n:
        raise ResolutionError(
            f"mode {n} needs at least {2 * n} cells per axis, mesh has {mesh.nx}")
    if assembled is None:
        assembled = assemble_illposed(problem, space, quad_order)
    a0, gram = assembled
    u = interpolate(space, oscillatory_mode(n))
    c = a0 @ u.coeffs
    z = spd_solve(gram, c, tol=cg_tol)
    sup = np.sqrt(max(float(c @ z), 0.0))
    w_norm = np.sqrt(max(float(u.coeffs @ gram.matvec(u.coeffs)), 0.0))
    l2 = plain_l2_norm(space, u, quad_order)
    return sup / w_norm, l2, w_norm


def illposed_ratio(problem, space, n, assembled=None, quad_order=None,
                   cg_tol=1e-10):
    """Graph-norm Riesz value of a0(., I_h u_n) over ||I_h u_n||_W."""
    ratio, _, _ = _mode_ratio(problem, space, n, assembled, quad_order, cg_tol)
    return ratio


def illposed_table(problem, space, n_max, quad_order=None, cg_tol=1e-10):
    """Rows (n, ratio, l2_norm, w_norm, envelope) for n = 1..n_max."""
    assembled = assemble_illposed(problem, space, quad_order)
    rows = []
    for n in range(1, n_max + 1):
        ratio, l2, w_norm = _mode_ratio(problem, space, n, assembled,
                                        quad_order, cg_tol)
        rows.append({"n": n, "ratio": ratio, "l2_norm": l2, "w_norm": w_norm,
                     "envelope": ratio * w_norm / l2})
    return rows


def residual_norm_direct(problem, space, u, quad_order=None):
    """Dual norm of the residual evaluated pointwise (no cancellation)."""
    order = quad_order or space.degree + 2
    rule = gauss_rule(order, 2)
    ctx = _coefficients(problem, space, rule)
    uv = u.cell_values(ctx["vals"])
    ug = u.cell_gradients(ctx["grads"])
    tu = ctx["bx"] * ug[..., 0] + ctx["by"] * ug[..., 1] + ctx["rho"] * uv
    fv = np.broadcast_to(evaluate(problem.f, ctx["X"], ctx["Y"]), ctx["X"].shape)
    r = tu - fv
    total = float(np.einsum("q,cq,cq->", ctx["w"], 1.0 / ctx["rho"], r * r))
    rule1d = gauss_rule(order, 1)
    for facet in problem.facets:
        if facet.tag is not BoundaryTag.INFLOW:
            continue
        trace, pts, wts, nb = _facet_data(problem, space, facet, rule1d)
        ub = trace @ u.coeffs[space.cell_dofs(facet.cell)]
        gv = np.broadcast_to(evaluate(problem.g, pts[:, 0], pts[:, 1]),
                             pts[:, 0].shape)
        total += float((wts * np.abs(nb)) @ ((ub - gv) ** 2))
    return float(np.sqrt(max(total, 0.0)))


def error_norms(problem, space, u, exact, quad_order=None):
    """L2 and graph-norm errors against a manufactured exact solution.

    The streamline derivative of the exact solution is recovered from the
    data via beta.grad(u) = f - rho*u, so no symbolic differentiation of
    the exact expression is needed.
    """
    order = quad_order or space.degree + 3
    rule = gauss_rule(order, 2)
    ctx = _coefficients(problem, space, rule)
    uv = u.cell_values(ctx["vals"])
    ug = u.cell_gradients(ctx["grads"])
    shape = ctx["X"].shape
    ev = np.broadcast_to(evaluate(exact, ctx["X"], ctx["Y"]), shape)
    fv = np.broadcast_to(evaluate(problem.f, ctx["X"], ctx["Y"]), shape)
    diff = uv - ev
    stream_h = ctx["bx"] * ug[..., 0] + ctx["by"] * ug[..., 1]
    stream_e = fv - ctx["rho"] * ev
    sdiff = stream_h - stream_e
    err_l2 = float(np.sqrt(np.einsum("q,cq->", ctx["w"], diff * diff)))
    err_v = float(np.sqrt(
        np.einsum("q,cq,cq->", ctx["w"], ctx["rho"], diff * diff)
        + np.einsum("q,cq->", ctx["w"], sdiff * sdiff)))
    return err_l2, err_v
