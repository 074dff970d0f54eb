"""Flat key=value run configurations.

One `key = value` pair per line, `#` starts a comment line, unknown keys
are rejected, and every coefficient/data value is an expression in the
closed grammar of :mod:`friedls.expr`.  Loading a configuration also
builds and validates the target problem, so every invariant violation
(rho below its floor, |alpha| beyond alpha_m, touching inflow/outflow,
nonzero divergence) surfaces at load time with a line-numbered message.
"""

import hashlib
from dataclasses import dataclass, field

from . import advection, elliptic, wave
from .errors import ConfigError
from .expr import ExpressionError, parse
from .fespace import FeSpace
from .mesh import build_mesh

INT_KEYS = {"nx", "ny", "degree", "quad_order", "seed"}
FLOAT_KEYS = {"rho0", "alpha_m", "c0", "tau", "cg_tol", "eig_tol"}
TEXT_KEYS = {"problem", "output"}
EXPR_KEYS = {"beta_x", "beta_y", "rho", "f", "g", "alpha", "f1_x", "f1_y",
             "f2", "p_init", "u_init", "g_sigma", "exact", "exact_ux",
             "exact_uy", "exact_p", "exact_xi1", "exact_xi2"}
ALL_KEYS = INT_KEYS | FLOAT_KEYS | TEXT_KEYS | EXPR_KEYS

COMMON_REQUIRED = {"problem", "nx", "ny", "degree"}
COMMON_OPTIONAL = {"quad_order", "cg_tol", "eig_tol", "seed", "output"}

PROBLEM_KEYS = {
    "advection": {
        "required": {"beta_x", "beta_y", "rho", "f", "g"},
        "optional": {"rho0", "exact"},
    },
    "elliptic": {
        "required": {"alpha", "alpha_m", "f1_x", "f1_y", "f2", "g"},
        "optional": {"exact_ux", "exact_uy", "exact_p"},
    },
    "wave": {
        "required": {"alpha", "alpha_m", "c0", "tau", "f1_x", "f2",
                     "g_sigma", "u_init", "p_init"},
        "optional": {"rho0", "exact_xi1", "exact_xi2"},
    },
}

DEFAULTS = {"cg_tol": 1e-10, "eig_tol": 1e-6, "seed": 42}
# rho0 floors: any positive rho passes for advection unless a floor is given
RHO0_DEFAULTS = {"advection": 1e-8, "wave": 1.0}


@dataclass
class RunConfig:
    problem: str
    nx: int
    ny: int
    degree: int
    quad_order: int | None
    cg_tol: float
    eig_tol: float
    seed: int
    output: str | None
    values: dict = field(repr=False)
    raw: dict = field(repr=False)

    def config_hash(self):
        text = "\n".join(f"{k}={self.raw[k]}" for k in sorted(self.raw))
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    def exact_solution(self):
        """Exact-solution expressions when the config supplies them."""
        keys = {"advection": ["exact"],
                "elliptic": ["exact_ux", "exact_uy", "exact_p"],
                "wave": ["exact_xi1", "exact_xi2"]}[self.problem]
        if not all(k in self.values for k in keys):
            return None
        exprs = [self.values[k] for k in keys]
        return exprs[0] if self.problem == "advection" else exprs


def _parse_value(key, text, line_no):
    try:
        if key in INT_KEYS:
            return int(text)
        if key in FLOAT_KEYS:
            return float(text)
        if key in TEXT_KEYS:
            return text
        return parse(text)
    except ExpressionError as exc:
        raise ConfigError(f"line {line_no}: bad expression for {key}: {exc}") \
            from exc
    except ValueError as exc:
        raise ConfigError(f"line {line_no}: bad value for {key}: {text!r}") \
            from exc


def parse_config_text(text):
    raw = {}
    values = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {line_no}: expected key = value, got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in ALL_KEYS:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {line_no}: duplicate key {key!r}")
        raw[key] = value
        values[key] = _parse_value(key, value, line_no)

    for key in COMMON_REQUIRED:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    problem = values["problem"]
    if problem not in PROBLEM_KEYS:
        raise ConfigError(f"unknown problem {problem!r} "
                          f"(expected advection, elliptic, or wave)")
    schema = PROBLEM_KEYS[problem]
    allowed = COMMON_REQUIRED | COMMON_OPTIONAL | schema["required"] | schema["optional"]
    for key in values:
        if key not in allowed:
            raise ConfigError(f"key {key!r} is not used by problem {problem!r}")
    for key in schema["required"]:
        if key not in values:
            raise ConfigError(f"problem {problem!r} requires key {key!r}")

    if values["degree"] not in (1, 2):
        raise ConfigError(f"degree must be 1 or 2, got {values['degree']}")

    config = RunConfig(
        problem=problem,
        nx=values["nx"],
        ny=values["ny"],
        degree=values["degree"],
        quad_order=values.get("quad_order"),
        cg_tol=values.get("cg_tol", DEFAULTS["cg_tol"]),
        eig_tol=values.get("eig_tol", DEFAULTS["eig_tol"]),
        seed=values.get("seed", DEFAULTS["seed"]),
        output=values.get("output"),
        values=values,
        raw=raw,
    )
    build_problem(config)  # run every invariant validation at load
    return config


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def build_problem(config, nx=None, ny=None):
    """Construct mesh + validated problem (optionally on a finer mesh)."""
    nx = nx or config.nx
    ny = ny or config.ny
    v = config.values
    if config.problem == "advection":
        mesh = build_mesh(nx, ny, (0.0, 1.0, 0.0, 1.0))
        rho0 = v.get("rho0", RHO0_DEFAULTS["advection"])
        problem = advection.make_advection_problem(
            mesh, (v["beta_x"], v["beta_y"]), v["rho"], rho0, v["f"], v["g"])
    elif config.problem == "elliptic":
        mesh = build_mesh(nx, ny, (0.0, 1.0, 0.0, 1.0))
        problem = elliptic.make_elliptic_problem(
            mesh, v["alpha"], v["alpha_m"],
            (v["f1_x"], v["f1_y"], v["f2"]), v["g"])
    else:
        tau = v["tau"]
        mesh = build_mesh(nx, ny, (0.0, 1.0, 0.0, tau))
        problem = wave.make_wave_problem(
            mesh, v["c0"], v.get("rho0", RHO0_DEFAULTS["wave"]), tau,
            v["alpha"], v["alpha_m"], v["f1_x"], v["f2"], v["g_sigma"],
            v["u_init"], v["p_init"])
    return problem


def build_space(config, problem):
    n_components = {"advection": 1, "elliptic": 3, "wave": 2}[config.problem]
    return FeSpace(problem.mesh, config.degree, n_components)


PROBLEM_MODULES = {"advection": advection, "elliptic": elliptic, "wave": wave}
