import numpy as np
import pytest

from friedls.quadrature import MAX_POINTS, gauss_rule


def companion_matrix_rule(n):
    """Independent oracle: Legendre roots from numpy's companion matrix."""
    return np.polynomial.legendre.leggauss(n)


def test_one_point_rule_is_midpoint():
    rule = gauss_rule(1, 1)
    assert rule.points == pytest.approx([0.0])
    assert rule.weights == pytest.approx([2.0])


def test_two_point_rule_matches_companion_oracle():
    rule = gauss_rule(2, 1)
    pts, wts = companion_matrix_rule(2)
    assert rule.points == pytest.approx(pts, abs=1e-14)
    assert rule.weights == pytest.approx(wts, abs=1e-14)
    assert rule.points == pytest.approx([-1.0 / np.sqrt(3.0),
                                         1.0 / np.sqrt(3.0)])


@pytest.mark.parametrize("n", range(1, MAX_POINTS + 1))
def test_rules_match_companion_oracle(n):
    rule = gauss_rule(n, 1)
    pts, wts = companion_matrix_rule(n)
    assert rule.points == pytest.approx(pts, abs=5e-14)
    assert rule.weights == pytest.approx(wts, abs=5e-14)


def test_three_point_rule_kills_odd_quintic():
    rule = gauss_rule(3, 1)
    assert float(rule.weights @ rule.points**5) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 12])
def test_exactness_on_monomials(n):
    rule = gauss_rule(n, 1)
    for degree in range(2 * n):
        exact = (1.0 - (-1.0) ** (degree + 1)) / (degree + 1)
        quad = float(rule.weights @ rule.points**degree)
        assert quad == pytest.approx(exact, abs=1e-13)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_tensor_exactness_2d(n):
    rule = gauss_rule(n, 2)
    assert rule.weights.sum() == pytest.approx(4.0)
    for a in range(2 * n):
        for b in range(2 * n):
            exact = ((1.0 - (-1.0) ** (a + 1)) / (a + 1)
                     * (1.0 - (-1.0) ** (b + 1)) / (b + 1))
            quad = float(rule.weights @ (rule.points[:, 0] ** a
                                         * rule.points[:, 1] ** b))
            assert quad == pytest.approx(exact, abs=1e-13)


def test_weights_positive_and_sum_to_measure():
    for n in (1, 4, 9, 12):
        rule = gauss_rule(n, 1)
        assert np.all(rule.weights > 0)
        assert rule.weights.sum() == pytest.approx(2.0)


def test_point_count_out_of_range():
    with pytest.raises(ValueError):
        gauss_rule(0, 1)
    with pytest.raises(ValueError):
        gauss_rule(MAX_POINTS + 1, 1)
    with pytest.raises(ValueError):
        gauss_rule(2, 3)
