import json

import numpy as np
import pytest

from friedls import cli
from friedls.config import load_config, parse_config_text
from friedls.errors import ConfigError

ADVECTION_CFG = """\
# manufactured advection run
problem = advection
nx = 8
ny = 8
degree = 1
beta_x = 1
beta_y = 0
rho = 1
rho0 = 1
f = 0
g = sin(pi*y)
exact = exp(-x)*sin(pi*y)
"""

ELLIPTIC_CFG = """\
problem = elliptic
nx = 8
ny = 8
degree = 1
alpha = 0
alpha_m = 0
f1_x = 0
f1_y = 0
f2 = 1
g = 1/2
exact_ux = 0
exact_uy = 0
exact_p = 1
"""

WAVE_CFG = """\
problem = wave
nx = 8
ny = 8
degree = 1
alpha = 0
alpha_m = 0
c0 = 1
tau = 1
f1_x = 0
f2 = 0
g_sigma = 1/2
u_init = 0
p_init = 1
exact_xi1 = 0
exact_xi2 = 1
"""


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_minimal_advection_config_valid():
    minimal = """problem = advection
nx = 4
ny = 4
degree = 1
beta_x = 1
beta_y = 0
rho = 1
f = 0
g = 0
"""
    config = parse_config_text(minimal)
    assert config.problem == "advection"
    assert config.seed == 42  # default


def test_pure_dirichlet_alpha_rejected():
    bad = ELLIPTIC_CFG.replace("alpha = 0\n", "alpha = 1.0\n")
    with pytest.raises(ConfigError):
        parse_config_text(bad)


def test_negative_rho_rejected():
    bad = ADVECTION_CFG.replace("rho = 1\n", "rho = -1\n")
    with pytest.raises(ConfigError):
        parse_config_text(bad)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config_text(ADVECTION_CFG + "mystery = 1\n")


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config_text(ADVECTION_CFG + "nx = 16\n")


def test_key_not_used_by_problem_rejected():
    with pytest.raises(ConfigError, match="not used"):
        parse_config_text(ADVECTION_CFG + "tau = 1\n")


def test_expression_error_carries_line_number():
    with pytest.raises(ConfigError, match="line"):
        parse_config_text(ADVECTION_CFG.replace("f = 0", "f = sin("))


def test_config_hash_stable_and_sensitive():
    a = parse_config_text(ADVECTION_CFG)
    b = parse_config_text(ADVECTION_CFG)
    c = parse_config_text(ADVECTION_CFG.replace("nx = 8", "nx = 16"))
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()


def test_solve_summary_fields(tmp_path, capsys):
    path = write(tmp_path, ADVECTION_CFG)
    code = cli.main(["solve", "--config", path])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert set(summary) == {"dofs", "residual_dual_norm", "v_norm",
                            "l_dual_norm", "stability_ok", "config_hash"}
    assert summary["stability_ok"] is True


def test_solve_zero_data(tmp_path, capsys):
    cfg = ADVECTION_CFG.replace("g = sin(pi*y)", "g = 0") \
                       .replace("exact = exp(-x)*sin(pi*y)\n", "")
    path = write(tmp_path, cfg)
    assert cli.main(["solve", "--config", path]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["v_norm"] == pytest.approx(0.0, abs=1e-12)
    assert summary["stability_ok"] is True


def test_invalid_config_exit_code(tmp_path):
    path = write(tmp_path, ADVECTION_CFG.replace("rho = 1", "rho = -1"))
    assert cli.main(["solve", "--config", path]) == 2


def test_convergence_csv_schema(tmp_path):
    path = write(tmp_path, ADVECTION_CFG)
    out = tmp_path / "conv.csv"
    code = cli.main(["convergence", "--config", path, "--levels", "2",
                     "--out", str(out), "--no-figures"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "level,h,dofs,err_l2,err_v,rate_l2,rate_v"
    first = lines[1].split(",")
    assert first[5] == "" and first[6] == ""  # no rates on the first row
    second = lines[2].split(",")
    assert float(second[6]) > 0.8


def test_convergence_requires_exact(tmp_path):
    cfg = ADVECTION_CFG.replace("exact = exp(-x)*sin(pi*y)\n", "")
    path = write(tmp_path, cfg)
    assert cli.main(["convergence", "--config", path, "--no-figures"]) == 2


def test_infsup_csv_schema(tmp_path):
    path = write(tmp_path, ADVECTION_CFG)
    out = tmp_path / "infsup.csv"
    code = cli.main(["infsup", "--config", path, "--levels", "2",
                     "--out", str(out), "--no-figures"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "level,dofs,alpha_h,iterations,paper_bound,pass"
    row = lines[1].split(",")
    assert float(row[4]) == 0.5
    assert row[5] == "true"


def test_infsup_variable_rho_reports_without_bound(tmp_path):
    cfg = ADVECTION_CFG.replace("rho = 1\n", "rho = 1+x\n")
    path = write(tmp_path, cfg)
    out = tmp_path / "infsup.csv"
    assert cli.main(["infsup", "--config", path, "--levels", "1",
                     "--out", str(out), "--no-figures"]) == 0
    row = out.read_text().splitlines()[1].split(",")
    assert row[4] == "" and row[5] == "na"


def test_illposed_csv_schema(tmp_path):
    cfg = ADVECTION_CFG.replace("nx = 8", "nx = 16").replace("ny = 8", "ny = 16")
    path = write(tmp_path, cfg)
    out = tmp_path / "ill.csv"
    code = cli.main(["illposed", "--config", path, "--nmax", "4",
                     "--out", str(out), "--no-figures"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,ratio,l2_norm,w_norm,envelope"
    assert len(lines) == 5


def test_illposed_resolution_guard(tmp_path):
    path = write(tmp_path, ADVECTION_CFG)
    assert cli.main(["illposed", "--config", path, "--nmax", "8",
                     "--no-figures"]) == 2


def test_verify_csv_and_exit(tmp_path):
    for cfg in (ADVECTION_CFG, ELLIPTIC_CFG, WAVE_CFG):
        path = write(tmp_path, cfg)
        out = tmp_path / "verify.csv"
        code = cli.main(["verify", "--config", path, "--out", str(out),
                         "--no-figures"])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "check,status,measured,bound,tolerance"
        assert all(line.split(",")[1] == "pass" for line in lines[1:])


def test_fracnorm_csv(tmp_path):
    path = write(tmp_path, WAVE_CFG)
    out = tmp_path / "frac.csv"
    assert cli.main(["fracnorm", "--config", path, "--out", str(out),
                     "--no-figures"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "check,status,measured,bound,tolerance"
    assert any("multiplier_drift" in line for line in lines)


def test_figures_rendered_alongside_csv(tmp_path):
    path = write(tmp_path, ADVECTION_CFG)
    out = tmp_path / "conv.csv"
    assert cli.main(["convergence", "--config", path, "--levels", "2",
                     "--out", str(out)]) == 0
    assert (tmp_path / "conv.png").exists()


def test_byte_identical_reruns(tmp_path):
    path = write(tmp_path, ADVECTION_CFG)
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        assert cli.main(["verify", "--config", path, "--out", str(out),
                         "--no-figures"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_wave_constant_solve_residual(tmp_path, capsys):
    path = write(tmp_path, WAVE_CFG)
    assert cli.main(["solve", "--config", path]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["residual_dual_norm"] <= 1e-10
    assert summary["stability_ok"] is True


def test_eigen_nonconvergence_exit_code(tmp_path):
    path = write(tmp_path, ADVECTION_CFG + "eig_tol = 1e-30\n")
    assert cli.main(["infsup", "--config", path, "--levels", "1",
                     "--no-figures"]) == 3


def test_verify_exit_one_on_failing_check(tmp_path, monkeypatch):
    from friedls import verify as verify_module

    def failing_suite(kind, problem, space, n_random=20, seed=42):
        return [verify_module.CheckReport.compare("forced_failure", 1.0, 0.0,
                                                  1e-12)]

    monkeypatch.setattr(verify_module, "run_identity_suite", failing_suite)
    path = write(tmp_path, ADVECTION_CFG)
    out = tmp_path / "verify.csv"
    code = cli.main(["verify", "--config", path, "--out", str(out),
                     "--no-figures"])
    assert code == 1
    assert "forced_failure,fail" in out.read_text()
