"""Command-line driver: solve, certify, and report.

Subcommands: solve | convergence | infsup | illposed | verify | fracnorm.
Tables are written as CSV with fixed column names and 12-significant-digit
floats, so identical configs and seeds reproduce byte-identical output.
Report commands render a companion PNG next to the CSV (disable with
--no-figures).  Exit codes: 0 success, 1 check failures, 2 invalid
configuration, 3 numerical failure.
"""

import argparse
import json
import sys

import numpy as np

from . import figures, fracnorm, verify
from .advection import illposed_table
from .config import (PROBLEM_MODULES, build_problem, build_space, load_config)
from .errors import (ConfigError, EigenConvergenceError, FriedlsError,
                     ResolutionError, SolverError)
from .expr import evaluate
from .fespace import FeFunction
from .linalg import spd_solve

EXIT_OK = 0
EXIT_CHECK_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows, out):
    lines = [",".join(header)]
    lines += [",".join(_fmt(cell) for cell in row) for row in rows]
    _emit("\n".join(lines) + "\n", out)


def _rho_is_one(config):
    if config.problem != "advection":
        return False
    xs = np.linspace(0.03, 0.97, 7)
    vals = np.broadcast_to(evaluate(config.values["rho"], xs, xs[::-1]), xs.shape)
    return bool(np.all(vals == 1.0))


def paper_bound(config):
    """Certified inf-sup lower bound for the configured problem, if any."""
    v = config.values
    if config.problem == "advection":
        return 0.5 if _rho_is_one(config) else None
    if config.problem == "elliptic":
        return (1.0 - v["alpha_m"]) / 3.0
    return (1.0 - v["alpha_m"]) / (8.0 * v["tau"] * np.e)


def cmd_solve(config, out=None):
    problem = build_problem(config)
    space = build_space(config, problem)
    module = PROBLEM_MODULES[config.problem]
    system = module.assemble_wellposed(problem, space, config.quad_order)
    x = spd_solve(system.operator, system.rhs, config.cg_tol)
    u = FeFunction(space, x)
    v_norm = system.v_norm(x)
    l_norm = system.load_norm()
    constant = verify.STABILITY_CONSTANTS[config.problem](problem)
    summary = {
        "dofs": system.n_dofs,
        "residual_dual_norm": module.residual_norm_direct(problem, space, u,
                                                          config.quad_order),
        "v_norm": v_norm,
        "l_dual_norm": l_norm,
        "stability_ok": bool(v_norm <= constant * l_norm * (1.0 + 1e-12) + 1e-15),
        "config_hash": config.config_hash(),
    }
    _emit(json.dumps(summary, sort_keys=True, indent=2) + "\n", out)
    return EXIT_OK


def cmd_convergence(config, levels=4, out=None, render=True):
    exact = config.exact_solution()
    if exact is None:
        raise ConfigError("convergence needs the exact solution expressions "
                          "(exact / exact_ux,exact_uy,exact_p / "
                          "exact_xi1,exact_xi2)")
    module = PROBLEM_MODULES[config.problem]
    rows = []
    prev = None
    for level in range(levels):
        scale = 2 ** level
        problem = build_problem(config, nx=config.nx * scale,
                                ny=config.ny * scale)
        space = build_space(config, problem)
        system = module.assemble_wellposed(problem, space, config.quad_order)
        x = system.solve(config.cg_tol, direct=system.n_dofs > 3000)
        u = FeFunction(space, x)
        err_l2, err_v = module.error_norms(problem, space, u, exact,
                                           config.quad_order)
        h = max(problem.mesh.hx, problem.mesh.hy)
        row = {"level": level, "h": h, "dofs": system.n_dofs,
               "err_l2": err_l2, "err_v": err_v,
               "rate_l2": None, "rate_v": None}
        if prev is not None:
            row["rate_l2"] = _rate(prev["err_l2"], err_l2)
            row["rate_v"] = _rate(prev["err_v"], err_v)
        rows.append(row)
        prev = row
    _csv(["level", "h", "dofs", "err_l2", "err_v", "rate_l2", "rate_v"],
         [[r["level"], r["h"], r["dofs"], r["err_l2"], r["err_v"],
           r["rate_l2"], r["rate_v"]] for r in rows], out)
    if render and out:
        figures.plot_convergence(rows, figures.figure_path(out),
                                 title=f"{config.problem} convergence")
    return EXIT_OK, rows


def _rate(err_coarse, err_fine):
    if err_coarse <= 0 or err_fine <= 0:
        return None
    return float(np.log2(err_coarse / err_fine))


def cmd_infsup(config, levels=3, out=None, render=True):
    module = PROBLEM_MODULES[config.problem]
    bound = paper_bound(config)
    rows = []
    for level in range(levels):
        scale = 2 ** level
        problem = build_problem(config, nx=config.nx * scale,
                                ny=config.ny * scale)
        space = build_space(config, problem)
        system = module.assemble_wellposed(problem, space, config.quad_order)
        result = system.infsup(tol=config.eig_tol)
        row = {"level": level, "dofs": system.n_dofs, "alpha_h": result.alpha,
               "iterations": result.iterations, "paper_bound": bound,
               "pass": None if bound is None
               else result.alpha >= bound - config.eig_tol}
        rows.append(row)
    _csv(["level", "dofs", "alpha_h", "iterations", "paper_bound", "pass"],
         [[r["level"], r["dofs"], r["alpha_h"], r["iterations"],
           r["paper_bound"], "na" if r["pass"] is None else r["pass"]]
          for r in rows], out)
    if render and out:
        figures.plot_infsup(rows, figures.figure_path(out),
                            title=f"{config.problem} inf-sup")
    return EXIT_OK, rows


def cmd_illposed(config, n_max=8, out=None, render=True):
    if config.problem != "advection":
        raise ConfigError("the sup-ratio decay table needs an advection config")
    xs = np.linspace(0.05, 0.95, 5)
    bx = np.broadcast_to(evaluate(config.values["beta_x"], xs, xs), xs.shape)
    by = np.broadcast_to(evaluate(config.values["beta_y"], xs, xs), xs.shape)
    if not (np.all(bx == 1.0) and np.all(by == 0.0)):
        raise ConfigError("the sup-ratio decay table is defined for the "
                          "unit-speed horizontal field beta = (1, 0)")
    if config.nx < 2 * n_max:
        raise ResolutionError(
            f"mode {n_max} needs nx >= {2 * n_max}, config has {config.nx}")
    problem = build_problem(config)
    space = build_space(config, problem)
    rows = illposed_table(problem, space, n_max, config.quad_order,
                          config.cg_tol)
    _csv(["n", "ratio", "l2_norm", "w_norm", "envelope"],
         [[r["n"], r["ratio"], r["l2_norm"], r["w_norm"], r["envelope"]]
          for r in rows], out)
    if render and out:
        figures.plot_illposed(rows, figures.figure_path(out))
    return EXIT_OK, rows


def _report_rows(reports):
    return [{"check": r.name, "status": "pass" if r.ok else "fail",
             "measured": r.measured, "bound": r.bound,
             "tolerance": r.tolerance} for r in reports]


def cmd_verify(config, out=None, render=True, n_random=20):
    problem = build_problem(config)
    space = build_space(config, problem)
    reports = verify.run_identity_suite(config.problem, problem, space,
                                        n_random=n_random, seed=config.seed)
    reports.append(verify.run_stability_check(config.problem, problem, space,
                                              solve_tol=config.cg_tol))
    rows = _report_rows(reports)
    _csv(["check", "status", "measured", "bound", "tolerance"],
         [[r["check"], r["status"], r["measured"], r["bound"], r["tolerance"]]
          for r in rows], out)
    if render and out:
        figures.plot_checks(rows, figures.figure_path(out),
                            title=f"{config.problem} identity suite")
    return (EXIT_OK if all(r.ok for r in reports) else EXIT_CHECK_FAIL), rows


def fracnorm_battery(tau=1.0, c0=1.0):
    """Half-norm verification battery; returns CheckReport list."""
    reports = []
    coarse = fracnorm.BoundaryCurve(tau, 32)
    const = lambda s: np.ones(np.shape(np.asarray(s, dtype=float)))
    _, l2_sq, semi_sq = fracnorm.gagliardo_half_norm(coarse, const)
    reports.append(verify.CheckReport.compare(
        "fracnorm_constant_seminorm", semi_sq / l2_sq, 0.0, 1e-13))

    period = coarse.period
    sin_fn = lambda s: np.sin(2.0 * np.pi * np.asarray(s, dtype=float) / period)
    n1, _, _ = fracnorm.gagliardo_half_norm(coarse, sin_fn)
    n2, _, _ = fracnorm.gagliardo_half_norm(coarse, lambda s: 2.0 * sin_fn(s))
    reports.append(verify.CheckReport.compare(
        "fracnorm_homogeneity", abs(n2 / n1 - 2.0), 0.0, 1e-12))

    semi_ab = fracnorm.seminorm_sq(coarse, sin_fn)
    semi_ba = fracnorm.seminorm_sq(coarse, sin_fn, transpose=True)
    reports.append(verify.CheckReport.compare(
        "fracnorm_kernel_symmetry", abs(semi_ab - semi_ba) / semi_ab,
        0.0, 1e-13))

    nstar = fracnorm.normal_extension(coarse)
    reports.append(verify.CheckReport.compare(
        "fracnorm_normal_lipschitz",
        fracnorm.lipschitz_quotient(coarse, nstar), 2.0, 1e-12))

    values = []
    for n_panels in (16, 32, 64):
        curve = fracnorm.BoundaryCurve(tau, n_panels)
        fn = lambda s: np.sin(2.0 * np.pi * np.asarray(s, dtype=float)
                              / curve.period)
        norm, _, _ = fracnorm.gagliardo_half_norm(curve, fn)
        values.append(norm)
    d1 = abs(values[1] - values[0])
    d2 = abs(values[2] - values[1])
    reports.append(verify.CheckReport.compare(
        "fracnorm_self_convergence", d2 / d1 if d1 > 0 else 0.0, 0.5, 0.0))

    curve32 = fracnorm.BoundaryCurve(tau, 32)
    curve128 = fracnorm.BoundaryCurve(tau, 128)
    for name, fn in fracnorm.standard_test_functions(curve32):
        for sign, label in ((+1, "plus"), (-1, "minus")):
            r32 = fracnorm.multiplier_ratio(curve32, fn, sign, c0)
            r128 = fracnorm.multiplier_ratio(curve128, fn, sign, c0)
            reports.append(verify.CheckReport.compare(
                f"fracnorm_multiplier_drift[{name},{label}]",
                abs(r128 - r32) / r32, 0.10, 0.0))
    return reports


def cmd_fracnorm(config, out=None, render=True):
    tau = config.values.get("tau", 1.0)
    c0 = config.values.get("c0", 1.0)
    reports = fracnorm_battery(tau, c0)
    rows = _report_rows(reports)
    _csv(["check", "status", "measured", "bound", "tolerance"],
         [[r["check"], r["status"], r["measured"], r["bound"], r["tolerance"]]
          for r in rows], out)
    if render and out:
        figures.plot_checks(rows, figures.figure_path(out),
                            title="boundary half-norm battery")
    return (EXIT_OK if all(r.ok for r in reports) else EXIT_CHECK_FAIL), rows


def build_parser():
    parser = argparse.ArgumentParser(
        prog="friedls",
        description="Least-squares solvers and certification for "
                    "first-order systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, **extra):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="key=value config file")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--no-figures", action="store_true",
                       help="skip the companion PNG")
        for flag, kwargs in extra.items():
            p.add_argument(flag, **kwargs)
        return p

    add("solve", "assemble, solve, and summarize one run")
    add("convergence", "manufactured-solution refinement study",
        **{"--levels": {"type": int, "default": 4}})
    add("infsup", "inf-sup lower-bound certification per level",
        **{"--levels": {"type": int, "default": 3}})
    add("illposed", "sup-ratio decay of the naive single-space form",
        **{"--nmax": {"type": int, "default": 8}})
    add("verify", "identity and stability battery")
    add("fracnorm", "boundary half-norm and multiplier battery")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    render = not args.no_figures
    try:
        if args.command == "solve":
            return cmd_solve(config, args.out)
        if args.command == "convergence":
            return cmd_convergence(config, args.levels, args.out, render)[0]
        if args.command == "infsup":
            return cmd_infsup(config, args.levels, args.out, render)[0]
        if args.command == "illposed":
            return cmd_illposed(config, args.nmax, args.out, render)[0]
        if args.command == "verify":
            return cmd_verify(config, args.out, render)[0]
        if args.command == "fracnorm":
            return cmd_fracnorm(config, args.out, render)[0]
        raise AssertionError(f"unhandled command {args.command}")
    except (ConfigError, ResolutionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, EigenConvergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FriedlsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
