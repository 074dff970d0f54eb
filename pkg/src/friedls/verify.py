"""Cross-cutting verification batteries.

Each check compares a measured quantity against a bound at a stated
tolerance; a report row fails iff measured > bound + tolerance.  Identity
residuals (adjointness, integration by parts, algebraic identities) use
relative tolerance 1e-12; quadrature-mediated inequality checks use 1e-10.
Random finite element fields draw standard-normal coefficients from a
seeded generator, so every battery is reproducible.
"""

from dataclasses import dataclass

import numpy as np

from . import advection, elliptic, wave
from .expr import evaluate
from .fespace import FeFunction, block_dofs
from .mesh import BoundaryTag
from .quadrature import gauss_rule

TOL_ALGEBRAIC = 1e-12
TOL_QUADRATURE = 1e-10


@dataclass
class CheckReport:
    name: str
    ok: bool
    measured: float
    bound: float
    tolerance: float
    context: str = ""

    @classmethod
    def compare(cls, name, measured, bound, tolerance, context=""):
        return cls(name, measured <= bound + tolerance,
                   float(measured), float(bound), float(tolerance), context)


def fd_derivative(e, point, axis, h=None):
    """Central-difference derivative of an expression along one variable."""
    x, y, t = point
    coords = [x, y, t]
    if h is None:
        h = 1e-6 * (1.0 + abs(coords[axis]))
    up = coords.copy()
    dn = coords.copy()
    up[axis] += h
    dn[axis] -= h
    return (evaluate(e, *up) - evaluate(e, *dn)) / (2.0 * h)


def random_fe_function(space, rng):
    return FeFunction(space, rng.standard_normal(space.n_dofs))


def _rel(residual, scale):
    return residual / max(abs(scale), 1e-30)


def _sigma_pointwise_residual(problem, space, xi, quad_order=None):
    """Max relative gap in the lateral flux-vs-trace identity.

    Checks c0 * n xi1 xi2 = ((tr+ xi)^2 - (tr- xi)^2) / 2 pointwise.
    """
    order = quad_order or space.degree + 2
    rule1d = gauss_rule(order, 1)
    worst = 0.0
    for facet in problem.facets:
        if facet.tag is not BoundaryTag.SIGMA:
            continue
        trace = space.tabulate_side(facet.side, rule1d)
        dofs = space.cell_dofs(facet.cell)
        v1 = trace @ xi.component(0)[dofs]
        v2 = trace @ xi.component(1)[dofs]
        lhs = problem.c0 * facet.normal[0] * v1 * v2
        tp = wave.lateral_trace(problem, xi, facet, rule1d, +1)
        tm = wave.lateral_trace(problem, xi, facet, rule1d, -1)
        rhs = 0.5 * (tp * tp - tm * tm)
        scale = max(np.abs(lhs).max(), np.abs(rhs).max(), 1e-30)
        worst = max(worst, np.abs(lhs - rhs).max() / scale)
    return worst


def _advection_checks(problem, space, fields, context):
    reports = []
    system = advection.assemble_wellposed(problem, space)
    for k, u in enumerate(fields):
        a0_uu, lower = advection.coercivity_split(problem, space, u)
        reports.append(CheckReport.compare(
            f"advection_coercivity[{k:02d}]", _rel(lower - a0_uu, a0_uu),
            0.0, TOL_QUADRATURE, context))
    for k in range(len(fields) - 1):
        u, v = fields[k], fields[k + 1]
        gap, a_val, a_star = advection.adjoint_residual(problem, space, u, v)
        reports.append(CheckReport.compare(
            f"advection_adjoint[{k:02d}]", _rel(gap, max(abs(a_val), abs(a_star))),
            0.0, TOL_ALGEBRAIC, context))
    for k, u in enumerate(fields):
        direct = advection.residual_norm_direct(problem, space, u)
        form = float(np.sqrt(max(
            u.coeffs @ system.operator.matvec(u.coeffs)
            - 2.0 * (system.rhs @ u.coeffs) + system.load_norm_sq, 0.0)))
        reports.append(CheckReport.compare(
            f"advection_residual_consistency[{k:02d}]",
            _rel(abs(direct - form), max(direct, form)),
            0.0, 1e-8, context))
    return reports


def _elliptic_checks(problem, space, fields, context):
    reports = []
    system = elliptic.assemble_wellposed(problem, space)
    for k, xi in enumerate(fields):
        gap, lhs, rhs = elliptic.ibp_residual(problem, space, xi)
        reports.append(CheckReport.compare(
            f"elliptic_ibp[{k:02d}]", _rel(gap, max(abs(lhs), abs(rhs))),
            0.0, TOL_ALGEBRAIC, context))
    for k in range(len(fields) - 1):
        xi, eta = fields[k], fields[k + 1]
        gap, a_val, a_star = elliptic.adjoint_residual(problem, space, xi, eta)
        reports.append(CheckReport.compare(
            f"elliptic_adjoint[{k:02d}]", _rel(gap, max(abs(a_val), abs(a_star))),
            0.0, TOL_ALGEBRAIC, context))
    for k, xi in enumerate(fields):
        r0, bound = elliptic.lower_bound_split(problem, space, xi, system)
        reports.append(CheckReport.compare(
            f"elliptic_lower_bound[{k:02d}]", _rel(bound - r0, max(r0, bound)),
            0.0, TOL_QUADRATURE, context))
    return reports


def _wave_checks(problem, space, fields, context):
    reports = []
    for k in range(len(fields) - 1):
        eta, xi = fields[k], fields[k + 1]
        gap, vol, bnd = wave.ibp_residual(problem, space, eta, xi)
        reports.append(CheckReport.compare(
            f"wave_ibp[{k:02d}]", _rel(gap, max(abs(vol), abs(bnd))),
            0.0, TOL_ALGEBRAIC, context))
        gap, a_val, a_star = wave.adjoint_residual(problem, space, eta, xi)
        reports.append(CheckReport.compare(
            f"wave_adjoint[{k:02d}]", _rel(gap, max(abs(a_val), abs(a_star))),
            0.0, TOL_ALGEBRAIC, context))
    for k, xi in enumerate(fields):
        outgoing, v_sq = wave.trace_energy_split(problem, space, xi)
        reports.append(CheckReport.compare(
            f"wave_trace_energy[{k:02d}]", _rel(outgoing - v_sq, v_sq),
            0.0, TOL_QUADRATURE, context))
        form, bound = wave.weighted_coercivity_split(problem, space, xi)
        reports.append(CheckReport.compare(
            f"wave_weighted_coercivity[{k:02d}]", _rel(bound - form, max(abs(form), bound)),
            0.0, TOL_QUADRATURE, context))
        reports.append(CheckReport.compare(
            f"wave_sigma_identity[{k:02d}]",
            _sigma_pointwise_residual(problem, space, xi),
            0.0, 1e-13, context))
    return reports


def algebraic_identity_checks(seed=42, n_samples=200, alpha_m=0.5):
    """Sampled scalar identities used inside the stability proofs."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(n_samples) * 3.0
    b = rng.standard_normal(n_samples) * 3.0
    al = rng.uniform(-alpha_m, alpha_m, n_samples)
    reports = []

    lhs = a * a + b * b
    rhs = 0.5 * ((a - b) ** 2 + (a + b) ** 2)
    gap = np.abs(lhs - rhs) / np.maximum(np.abs(lhs), 1e-30)
    reports.append(CheckReport.compare("algebra_sum_of_squares", gap.max(),
                                       0.0, TOL_ALGEBRAIC))
    drop = 0.5 * (a - b) ** 2 - lhs
    reports.append(CheckReport.compare(
        "algebra_sum_of_squares_lower", (drop / np.maximum(lhs, 1e-30)).max(),
        0.0, TOL_ALGEBRAIC))

    lhs = 2.0 * a * b
    rhs = ((a + b) ** 2 - (a - b) ** 2) / 2.0
    gap = np.abs(lhs - rhs) / np.maximum(np.abs(lhs), 1e-30)
    reports.append(CheckReport.compare("algebra_product_split", gap.max(),
                                       0.0, TOL_ALGEBRAIC))

    lhs = 0.25 * (b * b - a * a) + 0.5 * a * (a - al * b)
    rhs = 0.25 * (1.0 - alpha_m) * a * a
    gap = (rhs - lhs) / np.maximum(np.abs(lhs) + np.abs(rhs), 1e-30)
    reports.append(CheckReport.compare("algebra_impedance_lower", gap.max(),
                                       0.0, TOL_ALGEBRAIC))
    return reports


def run_identity_suite(kind, problem, space, n_random=20, seed=42):
    """Identity battery on n_random seeded FE fields for one problem kind."""
    if n_random <= 0:
        return []
    rng = np.random.default_rng(seed)
    fields = [random_fe_function(space, rng) for _ in range(n_random)]
    context = (f"{kind} Q{space.degree} {space.mesh.nx}x{space.mesh.ny} "
               f"seed{seed}")
    if kind == "advection":
        return _advection_checks(problem, space, fields, context)
    if kind == "elliptic":
        return _elliptic_checks(problem, space, fields, context)
    if kind == "wave":
        return _wave_checks(problem, space, fields, context) \
            + algebraic_identity_checks(seed, alpha_m=problem.alpha_m)
    raise ValueError(f"unknown problem kind {kind!r}")


STABILITY_CONSTANTS = {
    "advection": lambda problem: 2.0,
    "elliptic": lambda problem: 3.0 / (1.0 - problem.alpha_m),
    "wave": lambda problem: 8.0 * problem.tau * np.e / (1.0 - problem.alpha_m),
}


def run_stability_check(kind, problem, space, context="", solve_tol=1e-10):
    """Solve and assert the a-priori bound ||u_h||_V <= C ||l|| outright."""
    module = {"advection": advection, "elliptic": elliptic, "wave": wave}[kind]
    system = module.assemble_wellposed(problem, space)
    x = system.solve(solve_tol, direct=system.n_dofs > 3000)
    v_norm = system.v_norm(x)
    bound = STABILITY_CONSTANTS[kind](problem) * system.load_norm()
    return CheckReport.compare(f"stability_{kind}", v_norm, bound, 0.0,
                               context or f"{kind} Q{space.degree}")


def random_data_expression(rng, time_dependent=False):
    """Seeded random smooth data built from the config expression grammar."""
    second = "t" if time_dependent else "y"
    c = rng.uniform(-2.0, 2.0, size=4)
    k1, k2 = rng.integers(1, 4, size=2)
    terms = [
        f"{c[0]:.6f}*sin({k1}*pi*x)*cos({k2}*pi*{second})",
        f"{c[1]:.6f}*x*{second}",
        f"{c[2]:.6f}*exp(-x)",
        f"{c[3]:.6f}",
    ]
    picks = rng.choice(4, size=2, replace=False)
    return " + ".join(terms[p] for p in sorted(picks))
