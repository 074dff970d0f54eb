"""Acoustic wave equation on a space-time slab (one space dimension).

The mesh covers [0,1] x [0,tau] with the second axis playing the role of
time.  The scaled unknown block is xi = (rho0*c0*u, p) and the operator

    (T xi)_1 = dt xi1 + c0 dx xi2,      (T xi)_2 = dt xi2 + c0 dx xi1

is formally skew (its adjoint is -T).  Boundary and initial conditions are
enforced weakly: the characteristic traces on the lateral sides are
tr+- xi = sqrt(c0/2) (xi2 +- n xi1), and the residual dual norm is

    R(xi) = ||T xi - f||^2_Q
          + (1/tau) ||(tr- - alpha tr+) xi - sqrt(2 c0) g||^2_Sigma
          + (1/tau) ||xi|_{t=0} - xi_s||^2.

The exponentially weighted test tuple behind the stability constant is
available as a checkable inequality, not as a scheme ingredient.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .expr import Bin, Num, evaluate
from .fespace import block_dofs, scatter_matrix, scatter_vector
from .linalg import AssembledSystem, SymMatrix
from .mesh import BoundaryTag, classify_boundary_wave
from .quadrature import gauss_rule


@dataclass(frozen=True)
class WaveProblem:
    mesh: object
    c0: float
    rho0: float
    tau: float
    alpha: object
    alpha_m: float
    f: tuple      # block right-hand side (c0*f1, f2)
    g: object     # lateral boundary datum
    xi_s: tuple   # initial block (rho0*c0*u_s, p_s)
    facets: list


def make_wave_problem(mesh, c0, rho0, tau, alpha, alpha_m, f1, f2,
                      g, u_init, p_init, check_points=4):
    """Scale physical data into block form and validate the coefficients."""
    if c0 <= 0 or rho0 <= 0 or tau <= 0:
        raise ConfigError(f"c0, rho0, tau must be positive "
                          f"(got {c0}, {rho0}, {tau})")
    if not 0.0 <= alpha_m < 1.0:
        raise ConfigError(f"alpha_m must lie in [0, 1), got {alpha_m}")
    x0, x1, y0, y1 = mesh.extent
    if abs(y1 - y0 - tau) > 1e-12 * max(1.0, tau):
        raise ConfigError(f"mesh time extent {y1 - y0} does not match tau {tau}")
    facets = classify_boundary_wave(mesh)
    rule = gauss_rule(check_points, 1)
    for facet in facets:
        if facet.tag is not BoundaryTag.SIGMA:
            continue
        pts, _ = facet.quad_points(rule)
        av = np.broadcast_to(evaluate(alpha, pts[:, 0], pts[:, 1], pts[:, 1]),
                             pts[:, 0].shape)
        if np.abs(av).max() > alpha_m + 1e-12:
            raise ConfigError(
                f"|alpha| reaches {np.abs(av).max():.6g} > alpha_m = {alpha_m} "
                "on the lateral boundary")
    f_block = (Bin("*", Num(float(c0)), f1), f2)
    xi_s = (Bin("*", Num(float(rho0 * c0)), u_init), p_init)
    return WaveProblem(mesh, float(c0), float(rho0), float(tau), alpha,
                       float(alpha_m), f_block, g, xi_s, facets)


def _block_tables(problem, space, rule):
    """Identity and operator tables (nq, nlb, 2) of the 2-component basis."""
    vals, grads = space.tabulate(rule)
    nq, nl = vals.shape
    nlb = nl * 2
    VB = np.zeros((nq, nlb, 2))
    TB = np.zeros((nq, nlb, 2))
    c0 = problem.c0
    dx = grads[:, :, 0]
    dt = grads[:, :, 1]
    for l in range(nl):
        VB[:, l * 2 + 0, 0] = vals[:, l]
        VB[:, l * 2 + 1, 1] = vals[:, l]
        TB[:, l * 2 + 0, 0] = dt[:, l]
        TB[:, l * 2 + 0, 1] = c0 * dx[:, l]
        TB[:, l * 2 + 1, 0] = c0 * dx[:, l]
        TB[:, l * 2 + 1, 1] = dt[:, l]
    return VB, TB


def _sigma_tables(problem, space, facet, rule1d):
    """Characteristic trace tables on a lateral facet: (nq, nlb) each sign."""
    if facet.tag is not BoundaryTag.SIGMA:
        raise ConfigError(f"facet tagged {facet.tag} is not lateral")
    trace = space.tabulate_side(facet.side, rule1d)
    pts, wts = facet.quad_points(rule1d)
    n = facet.normal[0]
    root = np.sqrt(problem.c0 / 2.0)
    nq, nl = trace.shape
    tr_minus = np.zeros((nq, nl * 2))
    tr_plus = np.zeros((nq, nl * 2))
    for l in range(nl):
        tr_minus[:, l * 2 + 0] = -root * n * trace[:, l]
        tr_minus[:, l * 2 + 1] = root * trace[:, l]
        tr_plus[:, l * 2 + 0] = root * n * trace[:, l]
        tr_plus[:, l * 2 + 1] = root * trace[:, l]
    av = np.broadcast_to(evaluate(problem.alpha, pts[:, 0], pts[:, 1],
                                  pts[:, 1]), pts[:, 0].shape)
    return {"trace": trace, "pts": pts, "wts": wts, "alpha": av,
            "tr_minus": tr_minus, "tr_plus": tr_plus}


def _cap_tables(space, facet, rule1d):
    """Both-component trace table (nq, nlb, 2) on an initial/final facet."""
    trace = space.tabulate_side(facet.side, rule1d)
    pts, wts = facet.quad_points(rule1d)
    nq, nl = trace.shape
    VBf = np.zeros((nq, nl * 2, 2))
    for l in range(nl):
        VBf[:, l * 2 + 0, 0] = trace[:, l]
        VBf[:, l * 2 + 1, 1] = trace[:, l]
    return {"trace": trace, "pts": pts, "wts": wts, "VBf": VBf}


def spacetime_apply(problem, xi, cell, rule, adjoint=False):
    """Pointwise values (nq, 2) of T xi (or -T xi) on one cell."""
    space = xi.space
    vals, grads = space.tabulate(rule)
    dofs = space.cell_dofs(cell)
    c1 = xi.component(0)[dofs]
    c2 = xi.component(1)[dofs]
    dx1 = grads[:, :, 0] @ c1
    dt1 = grads[:, :, 1] @ c1
    dx2 = grads[:, :, 0] @ c2
    dt2 = grads[:, :, 1] @ c2
    out = np.empty((vals.shape[0], 2))
    out[:, 0] = dt1 + problem.c0 * dx2
    out[:, 1] = dt2 + problem.c0 * dx1
    return -out if adjoint else out


def lateral_trace(problem, xi, facet, rule1d, sign):
    """tr+- xi = sqrt(c0/2) (xi2 +- n xi1) on a lateral facet."""
    tables = _sigma_tables(problem, xi.space, facet, rule1d)
    table = tables["tr_plus"] if sign > 0 else tables["tr_minus"]
    dofs = block_dofs(xi.space, xi.space.cell_dofs(facet.cell))
    return table @ xi.coeffs[dofs]


def cap_trace(problem, xi, facet, rule1d):
    """Restriction of both components (nq, 2) on an initial/final facet."""
    if facet.tag not in (BoundaryTag.Q0, BoundaryTag.QTAU):
        raise ConfigError(f"facet tagged {facet.tag} is not an end face")
    tables = _cap_tables(xi.space, facet, rule1d)
    dofs = block_dofs(xi.space, xi.space.cell_dofs(facet.cell))
    return np.einsum("qir,i->qr", tables["VBf"], xi.coeffs[dofs])


def boundary_flux(problem, xi, facet, rule1d):
    """Flux values (nq, 2): c0 (n xi2, n xi1) laterally, +-xi on the caps."""
    space = xi.space
    trace = space.tabulate_side(facet.side, rule1d)
    dofs = space.cell_dofs(facet.cell)
    v1 = trace @ xi.component(0)[dofs]
    v2 = trace @ xi.component(1)[dofs]
    out = np.empty((trace.shape[0], 2))
    if facet.tag is BoundaryTag.SIGMA:
        n = facet.normal[0]
        out[:, 0] = problem.c0 * n * v2
        out[:, 1] = problem.c0 * n * v1
    elif facet.tag is BoundaryTag.QTAU:
        out[:, 0], out[:, 1] = v1, v2
    elif facet.tag is BoundaryTag.Q0:
        out[:, 0], out[:, 1] = -v1, -v2
    else:
        raise ConfigError(f"untagged facet {facet}")
    return out


def characteristic_multiplier(problem, n_value, sign):
    """The field (n*, +-1)/sqrt(2 c0) pairing the flux with tr+-."""
    scale = 1.0 / np.sqrt(2.0 * problem.c0)
    return np.array([scale * n_value, sign * scale])


def assemble_wellposed(problem, space, quad_order=None):
    if space.n_components != 2:
        raise ConfigError("wave block space needs 2 components")
    order = quad_order or space.degree + 2
    rule = gauss_rule(order, 2)
    VB, TB = _block_tables(problem, space, rule)
    pts, w = space.quad_points(rule)
    X, T = pts[..., 0], pts[..., 1]
    tau = problem.tau

    b_loc = np.einsum("q,qir,qjr->ij", w, TB, TB, optimize=True)
    m_loc = np.einsum("q,qir,qjr->ij", w, VB, VB, optimize=True) \
        + tau * tau * b_loc

    fv = np.stack([np.broadcast_to(evaluate(fc, X, T, T), X.shape)
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
    root2c0 = np.sqrt(2.0 * problem.c0)
    for facet in problem.facets:
        fdofs = block_dofs(space, space.cell_dofs(facet.cell))[None, :]
        if facet.tag is BoundaryTag.SIGMA:
            tb = _sigma_tables(problem, space, facet, rule1d)
            resid_tr = tb["tr_minus"] - tb["alpha"][:, None] * tb["tr_plus"]
            gv = np.broadcast_to(evaluate(problem.g, tb["pts"][:, 0],
                                          tb["pts"][:, 1], tb["pts"][:, 1]),
                                 tb["pts"][:, 0].shape)
            local_b = np.einsum("q,qi,qj->ij", tb["wts"] / tau, resid_tr, resid_tr)
            local_m = tau * np.einsum("q,qi,qj->ij", tb["wts"],
                                      tb["tr_minus"], tb["tr_minus"])
            scatter_matrix(space.n_dofs, fdofs, local_b[None],
                           rows_b, cols_b, vals_b)
            scatter_matrix(space.n_dofs, fdofs, local_m[None],
                           rows_m, cols_m, vals_m)
            scatter_vector(rhs, fdofs,
                           (root2c0 / tau) * np.einsum("q,q,qi->i", tb["wts"],
                                                       gv, resid_tr)[None])
            load_sq += (2.0 * problem.c0 / tau) * float(tb["wts"] @ (gv * gv))
        elif facet.tag is BoundaryTag.Q0:
            tb = _cap_tables(space, facet, rule1d)
            sv = np.stack([np.broadcast_to(
                evaluate(problem.xi_s[r], tb["pts"][:, 0], 0.0, 0.0),
                tb["pts"][:, 0].shape) for r in range(2)], axis=-1)
            local = np.einsum("q,qir,qjr->ij", tb["wts"], tb["VBf"], tb["VBf"])
            scatter_matrix(space.n_dofs, fdofs, local[None] / tau,
                           rows_b, cols_b, vals_b)
            scatter_matrix(space.n_dofs, fdofs, tau * local[None],
                           rows_m, cols_m, vals_m)
            scatter_vector(rhs, fdofs,
                           np.einsum("q,qr,qir->i", tb["wts"] / tau, sv,
                                     tb["VBf"])[None])
            load_sq += float(np.einsum("q,qr,qr->", tb["wts"], sv, sv)) / tau

    operator = SymMatrix.from_coo(space.n_dofs, rows_b, cols_b, vals_b)
    gram = SymMatrix.from_coo(space.n_dofs, rows_m, cols_m, vals_m)
    return AssembledSystem(operator, rhs, load_sq, gram)


def _block_fields(problem, space, xi, rule):
    """Values and operator images of xi at all volume points: (nc, nq, 2)."""
    vals, grads = space.tabulate(rule)
    dofs = space.cell_dofs_array
    c1 = xi.component(0)[dofs]
    c2 = xi.component(1)[dofs]
    v = np.stack([np.einsum("ql,cl->cq", vals, c1),
                  np.einsum("ql,cl->cq", vals, c2)], axis=-1)
    g1 = np.einsum("qld,cl->cqd", grads, c1)
    g2 = np.einsum("qld,cl->cqd", grads, c2)
    t = np.empty_like(v)
    t[..., 0] = g1[..., 1] + problem.c0 * g2[..., 0]
    t[..., 1] = g2[..., 1] + problem.c0 * g1[..., 0]
    return v, t


def ibp_residual(problem, space, eta, xi, quad_order=None):
    """|int eta.T(xi) + int xi.T(eta) - boundary flux pairing| by quadrature."""
    order = quad_order or space.degree + 2
    rule = gauss_rule(order, 2)
    _, w = space.quad_points(rule)
    ev, et = _block_fields(problem, space, eta, rule)
    xv, xt = _block_fields(problem, space, xi, rule)
    volume = float(np.einsum("q,cqr,cqr->", w, ev, xt)) \
        + float(np.einsum("q,cqr,cqr->", w, xv, et))
    rule1d = gauss_rule(order, 1)
    boundary = 0.0
    for facet in problem.facets:
        flux = boundary_flux(problem, xi, facet, rule1d)
        trace = space.tabulate_side(facet.side, rule1d)
        dofs = space.cell_dofs(facet.cell)
        e1 = trace @ eta.component(0)[dofs]
        e2 = trace @ eta.component(1)[dofs]
        _, wts = facet.quad_points(rule1d)
        boundary += float(wts @ (e1 * flux[:, 0] + e2 * flux[:, 1]))
    return abs(volume - boundary), volume, boundary


def adjoint_residual(problem, space, eta, xi, quad_order=None):
    """|a(eta_hat, xi) - a*(xi_hat, eta)| with the natural trace tuples."""
    order = quad_order or space.degree + 2
    rule = gauss_rule(order, 2)
    _, w = space.quad_points(rule)
    ev, et = _block_fields(problem, space, eta, rule)
    xv, xt = _block_fields(problem, space, xi, rule)
    a_val = float(np.einsum("q,cqr,cqr->", w, ev, xt))
    a_star = -float(np.einsum("q,cqr,cqr->", w, xv, et))
    rule1d = gauss_rule(order, 1)
    for facet in problem.facets:
        if facet.tag is BoundaryTag.SIGMA:
            tb = _sigma_tables(problem, space, facet, rule1d)
            dofs = block_dofs(space, space.cell_dofs(facet.cell))
            xm = tb["tr_minus"] @ xi.coeffs[dofs]
            xp = tb["tr_plus"] @ xi.coeffs[dofs]
            em = tb["tr_minus"] @ eta.coeffs[dofs]
            ep = tb["tr_plus"] @ eta.coeffs[dofs]
            a_val += float(tb["wts"] @ (em * (xm - tb["alpha"] * xp)))
            a_star += float(tb["wts"] @ (xp * (ep - tb["alpha"] * em)))
        else:
            tv_x = cap_trace(problem, xi, facet, rule1d)
            tv_e = cap_trace(problem, eta, facet, rule1d)
            _, wts = facet.quad_points(rule1d)
            pairing = float(np.einsum("q,qr,qr->", wts, tv_e, tv_x))
            if facet.tag is BoundaryTag.Q0:
                a_val += pairing
            else:
                a_star += pairing
    return abs(a_val - a_star), a_val, a_star


def weighted_coercivity_split(problem, space, xi, quad_order=None):
    """Exponentially weighted test tuple: form value and certified lower bound.

    Returns (a(eta_tilde, xi), (1 - alpha_M) / (4 tau) * ||eta_tilde||_L^2)
    for eta_tilde = (exp(-t/tau) xi, exp(-t/tau) tr- xi, xi|_{t=0}).
    """
    order = quad_order or space.degree + 3
    rule = gauss_rule(order, 2)
    pts, w = space.quad_points(rule)
    T = pts[..., 1]
    tau = problem.tau
    weight = np.exp(-T / tau)
    xv, xt = _block_fields(problem, space, xi, rule)
    form = float(np.einsum("q,cq,cqr,cqr->", w, weight, xv, xt))
    norm_sq = float(np.einsum("q,cq,cqr,cqr->", w, weight * weight, xv, xv))
    rule1d = gauss_rule(order, 1)
    for facet in problem.facets:
        if facet.tag is BoundaryTag.SIGMA:
            tb = _sigma_tables(problem, space, facet, rule1d)
            dofs = block_dofs(space, space.cell_dofs(facet.cell))
            xm = tb["tr_minus"] @ xi.coeffs[dofs]
            xp = tb["tr_plus"] @ xi.coeffs[dofs]
            wf = np.exp(-tb["pts"][:, 1] / tau)
            form += float(tb["wts"] @ (wf * xm * (xm - tb["alpha"] * xp)))
            norm_sq += tau * float(tb["wts"] @ ((wf * xm) ** 2))
        elif facet.tag is BoundaryTag.Q0:
            tv = cap_trace(problem, xi, facet, rule1d)
            _, wts = facet.quad_points(rule1d)
            cap_sq = float(np.einsum("q,qr,qr->", wts, tv, tv))
            form += cap_sq
            norm_sq += tau * cap_sq
    bound = (1.0 - problem.alpha_m) / (4.0 * tau) * norm_sq
    return form, bound


def trace_energy_split(problem, space, xi, quad_order=None):
    """Outgoing trace energy vs the full solution norm.

    Returns (tau ||xi|_{t=tau}||^2 + tau ||tr+ xi||^2_Sigma, ||xi||_V^2).
    """
    order = quad_order or space.degree + 2
    rule = gauss_rule(order, 2)
    _, w = space.quad_points(rule)
    tau = problem.tau
    xv, xt = _block_fields(problem, space, xi, rule)
    v_sq = float(np.einsum("q,cqr,cqr->", w, xv, xv)) \
        + tau * tau * float(np.einsum("q,cqr,cqr->", w, xt, xt))
    outgoing = 0.0
    rule1d = gauss_rule(order, 1)
    for facet in problem.facets:
        if facet.tag is BoundaryTag.SIGMA:
            tb = _sigma_tables(problem, space, facet, rule1d)
            dofs = block_dofs(space, space.cell_dofs(facet.cell))
            xm = tb["tr_minus"] @ xi.coeffs[dofs]
            xp = tb["tr_plus"] @ xi.coeffs[dofs]
            outgoing += tau * float(tb["wts"] @ (xp * xp))
            v_sq += tau * float(tb["wts"] @ (xm * xm))
        else:
            tv = cap_trace(problem, xi, facet, rule1d)
            _, wts = facet.quad_points(rule1d)
            cap_sq = tau * float(np.einsum("q,qr,qr->", wts, tv, tv))
            if facet.tag is BoundaryTag.QTAU:
                outgoing += cap_sq
            else:
                v_sq += cap_sq
    return outgoing, v_sq


def residual_norm_direct(problem, space, xi, quad_order=None):
    """Dual norm of the residual evaluated pointwise (no cancellation)."""
    order = quad_order or space.degree + 2
    rule = gauss_rule(order, 2)
    pts, w = space.quad_points(rule)
    X, T = pts[..., 0], pts[..., 1]
    tau = problem.tau
    _, t = _block_fields(problem, space, xi, rule)
    fv = np.stack([np.broadcast_to(evaluate(fc, X, T, T), X.shape)
                   for fc in problem.f], axis=-1)
    r = t - fv
    total = float(np.einsum("q,cqr,cqr->", w, r, r))
    rule1d = gauss_rule(order, 1)
    root2c0 = np.sqrt(2.0 * problem.c0)
    for facet in problem.facets:
        if facet.tag is BoundaryTag.SIGMA:
            tb = _sigma_tables(problem, space, facet, rule1d)
            dofs = block_dofs(space, space.cell_dofs(facet.cell))
            tr = (tb["tr_minus"] - tb["alpha"][:, None] * tb["tr_plus"]) \
                @ xi.coeffs[dofs]
            gv = np.broadcast_to(evaluate(problem.g, tb["pts"][:, 0],
                                          tb["pts"][:, 1], tb["pts"][:, 1]),
                                 tb["pts"][:, 0].shape)
            total += float(tb["wts"] @ ((tr - root2c0 * gv) ** 2)) / tau
        elif facet.tag is BoundaryTag.Q0:
            tv = cap_trace(problem, xi, facet, rule1d)
            pts1, wts = facet.quad_points(rule1d)
            sv = np.stack([np.broadcast_to(
                evaluate(problem.xi_s[r_], pts1[:, 0], 0.0, 0.0),
                pts1[:, 0].shape) for r_ in range(2)], axis=-1)
            d = tv - sv
            total += float(np.einsum("q,qr,qr->", wts, d, d)) / tau
    return float(np.sqrt(max(total, 0.0)))


def error_norms(problem, space, xi, exact, quad_order=None):
    """L2 and solution-norm errors against manufactured exact components.

    exact = (xi1, xi2) expressions of (x, t); the operator image of the
    exact solution is recovered from the data f.
    """
    order = quad_order or space.degree + 3
    rule = gauss_rule(order, 2)
    pts, w = space.quad_points(rule)
    X, T = pts[..., 0], pts[..., 1]
    tau = problem.tau
    v, t = _block_fields(problem, space, xi, rule)
    ev = np.stack([np.broadcast_to(evaluate(ec, X, T, T), X.shape)
                   for ec in exact], axis=-1)
    fv = np.stack([np.broadcast_to(evaluate(fc, X, T, T), X.shape)
                   for fc in problem.f], axis=-1)
    diff = v - ev
    tdiff = t - fv
    err_l2_sq = float(np.einsum("q,cqr,cqr->", w, diff, diff))
    err_v_sq = err_l2_sq + tau * tau * float(np.einsum("q,cqr,cqr->", w,
                                                       tdiff, tdiff))
    rule1d = gauss_rule(order, 1)
    root = np.sqrt(problem.c0 / 2.0)
    for facet in problem.facets:
        p, wts = facet.quad_points(rule1d)
        if facet.tag is BoundaryTag.SIGMA:
            dofs = block_dofs(space, space.cell_dofs(facet.cell))
            tb = _sigma_tables(problem, space, facet, rule1d)
            tr_h = tb["tr_minus"] @ xi.coeffs[dofs]
            e1 = np.broadcast_to(evaluate(exact[0], p[:, 0], p[:, 1], p[:, 1]),
                                 p[:, 0].shape)
            e2 = np.broadcast_to(evaluate(exact[1], p[:, 0], p[:, 1], p[:, 1]),
                                 p[:, 0].shape)
            tr_e = root * (e2 - facet.normal[0] * e1)
            err_v_sq += tau * float(wts @ ((tr_h - tr_e) ** 2))
        elif facet.tag is BoundaryTag.Q0:
            tv = cap_trace(problem, xi, facet, rule1d)
            ev0 = np.stack([np.broadcast_to(
                evaluate(exact[r_], p[:, 0], 0.0, 0.0),
                p[:, 0].shape) for r_ in range(2)], axis=-1)
            d = tv - ev0
            err_v_sq += tau * float(np.einsum("q,qr,qr->", wts, d, d))
    return float(np.sqrt(err_l2_sq)), float(np.sqrt(err_v_sq))
