import numpy as np
import pytest

from friedls import advection, elliptic, wave
from friedls.expr import parse
from friedls.fespace import FeSpace
from friedls.mesh import build_mesh

UNIT_SQUARE = (0.0, 1.0, 0.0, 1.0)


def make_advection(nx=8, degree=1, beta=("1", "0"), rho="1", rho0=1.0,
                   f="0", g="0"):
    mesh = build_mesh(nx, nx, UNIT_SQUARE)
    problem = advection.make_advection_problem(
        mesh, (parse(beta[0]), parse(beta[1])), parse(rho), rho0,
        parse(f), parse(g))
    space = FeSpace(mesh, degree)
    return problem, space


def make_elliptic(nx=8, degree=1, alpha="0", alpha_m=0.0,
                  f=("0", "0", "0"), g="0"):
    mesh = build_mesh(nx, nx, UNIT_SQUARE)
    problem = elliptic.make_elliptic_problem(
        mesh, parse(alpha), alpha_m, tuple(parse(c) for c in f), parse(g))
    space = FeSpace(mesh, degree, n_components=3)
    return problem, space


def make_wave(nx=8, degree=1, c0=1.0, rho0=1.0, tau=1.0, alpha="0",
              alpha_m=0.0, f1="0", f2="0", g="0", u_init="0", p_init="0"):
    mesh = build_mesh(nx, nx, (0.0, 1.0, 0.0, tau))
    problem = wave.make_wave_problem(
        mesh, c0, rho0, tau, parse(alpha), alpha_m, parse(f1), parse(f2),
        parse(g), parse(u_init), parse(p_init))
    space = FeSpace(mesh, degree, n_components=2)
    return problem, space


# manufactured data shared between module tests and the acceptance suite
ADVECTION_MANUFACTURED = dict(beta=("1", "0"), rho="1", rho0=1.0,
                              f="0", g="sin(pi*y)")
ADVECTION_EXACT = "exp(-x)*sin(pi*y)"

ELLIPTIC_MANUFACTURED = dict(alpha="0", alpha_m=0.0,
                             f=("0", "0", "(1+2*pi^2)*sin(pi*x)*sin(pi*y)"),
                             g="-(pi/2)*(sin(pi*x)+sin(pi*y))")
ELLIPTIC_EXACT = ("-pi*cos(pi*x)*sin(pi*y)", "-pi*sin(pi*x)*cos(pi*y)",
                  "sin(pi*x)*sin(pi*y)")

WAVE_MANUFACTURED = dict(c0=1.0, rho0=1.0, tau=1.0, alpha="0", alpha_m=0.0,
                         f1="0", f2="0", g="-(1-x)*sin(2*pi*t)",
                         u_init="sin(2*pi*x)", p_init="sin(2*pi*x)")
WAVE_EXACT = ("sin(2*pi*(x-t))", "sin(2*pi*(x-t))")

WAVE_CONSTANT = dict(c0=1.0, rho0=1.0, tau=1.0, alpha="0", alpha_m=0.0,
                     f1="0", f2="0", g="1/2", u_init="0", p_init="1")
WAVE_CONSTANT_EXACT = ("0", "1")

ELLIPTIC_CONSTANT = dict(alpha="0", alpha_m=0.0, f=("0", "0", "1"), g="1/2")
ELLIPTIC_CONSTANT_EXACT = ("0", "0", "1")

ADVECTION_CONSTANT = dict(beta=("1", "0"), rho="1", rho0=1.0, f="1", g="1")
ADVECTION_CONSTANT_EXACT = "1"
