import numpy as np
import pytest

from conftest import (ADVECTION_MANUFACTURED, ELLIPTIC_MANUFACTURED,
                      WAVE_CONSTANT, make_advection, make_elliptic, make_wave)
from friedls import verify
from friedls.expr import parse


def test_fd_oracle_square():
    assert verify.fd_derivative(parse("x^2"), (1.0, 0.0, 0.0), axis=0) \
        == pytest.approx(2.0, abs=1e-9)


def test_fd_oracle_constant():
    assert verify.fd_derivative(parse("7"), (0.3, 0.1, 0.0), axis=0) \
        == pytest.approx(0.0, abs=1e-12)


def test_fd_oracle_sine_at_origin():
    assert verify.fd_derivative(parse("sin(x)"), (0.0, 0.0, 0.0), axis=0) \
        == pytest.approx(1.0, abs=1e-9)


def test_empty_suite():
    problem, space = make_advection(nx=4, degree=1)
    assert verify.run_identity_suite("advection", problem, space, 0, 42) == []


def test_advection_suite_passes():
    problem, space = make_advection(nx=8, degree=2, **ADVECTION_MANUFACTURED)
    reports = verify.run_identity_suite("advection", problem, space, 20, 42)
    assert len(reports) == 20 + 19 + 20
    assert all(r.ok for r in reports)


def test_wave_suite_ibp_thresholds():
    problem, space = make_wave(nx=8, degree=2, **WAVE_CONSTANT)
    reports = verify.run_identity_suite("wave", problem, space, 20, 42)
    assert all(r.ok for r in reports)
    ibp = [r for r in reports if r.name.startswith("wave_ibp")]
    assert ibp and all(r.measured <= 1e-12 for r in ibp)


def test_elliptic_suite_passes():
    problem, space = make_elliptic(nx=8, degree=1, alpha="0.5", alpha_m=0.5,
                                   f=("0", "0", "1"), g="1/4")
    reports = verify.run_identity_suite("elliptic", problem, space, 20, 42)
    assert all(r.ok for r in reports)


def test_suite_deterministic_under_seed():
    problem, space = make_advection(nx=4, degree=1)
    a = verify.run_identity_suite("advection", problem, space, 5, 42)
    b = verify.run_identity_suite("advection", problem, space, 5, 42)
    assert [(r.name, r.measured) for r in a] == [(r.name, r.measured) for r in b]
    c = verify.run_identity_suite("advection", problem, space, 5, 43)
    assert [r.measured for r in a] != [r.measured for r in c]


def test_algebraic_identity_battery():
    reports = verify.algebraic_identity_checks(seed=42)
    assert {r.name for r in reports} == {
        "algebra_sum_of_squares", "algebra_sum_of_squares_lower",
        "algebra_product_split", "algebra_impedance_lower"}
    assert all(r.ok for r in reports)


def test_stability_checks_all_problems():
    problem, space = make_advection(nx=16, degree=2, **ADVECTION_MANUFACTURED)
    report = verify.run_stability_check("advection", problem, space)
    assert report.ok
    # oracle values for this configuration
    assert report.bound == pytest.approx(2.0 / np.sqrt(2.0), abs=1e-10)
    assert report.measured == pytest.approx(0.6575, abs=2e-3)

    problem, space = make_elliptic(nx=8, degree=1, **ELLIPTIC_MANUFACTURED)
    assert verify.run_stability_check("elliptic", problem, space).ok

    problem, space = make_wave(nx=8, degree=1, **WAVE_CONSTANT)
    report = verify.run_stability_check("wave", problem, space)
    assert report.ok
    assert report.bound == pytest.approx(8.0 * np.e * np.sqrt(2.0), rel=1e-10)


def test_stability_zero_data():
    problem, space = make_advection(nx=4, degree=1, f="0", g="0")
    report = verify.run_stability_check("advection", problem, space)
    assert report.ok
    assert report.measured == pytest.approx(0.0, abs=1e-12)


def test_random_data_expressions_parse_and_vary():
    rng = np.random.default_rng(42)
    texts = {verify.random_data_expression(rng) for _ in range(5)}
    assert len(texts) > 1
    for text in texts:
        parse(text)
