import numpy as np
import pytest
from scipy.integrate import quad

from friedls.expr import parse
from friedls.fespace import (FeFunction, FeSpace, eval_basis, facet_trace,
                             interpolate, lagrange_eval_1d, lagrange_nodes_1d)
from friedls.mesh import build_mesh
from friedls.quadrature import gauss_rule


def test_partition_of_unity_and_gradient_sum():
    mesh = build_mesh(3, 2, (0, 1, 0, 1))
    for degree in (1, 2):
        space = FeSpace(mesh, degree)
        rule = gauss_rule(4, 2)
        vals, grads = space.tabulate(rule)
        assert np.allclose(vals.sum(axis=1), 1.0, atol=1e-14)
        assert np.allclose(grads.sum(axis=1), 0.0, atol=1e-12)


def test_quadratic_center_basis():
    # direct tensor-Lagrange oracle: the center bubble is 1 at the cell
    # center and 0 at the other nodes
    nodes = lagrange_nodes_1d(2)
    vals, _ = lagrange_eval_1d(nodes, np.array([0.0]))
    center_1d = vals[0]
    assert center_1d == pytest.approx([0.0, 1.0, 0.0], abs=1e-15)
    mesh = build_mesh(1, 1, (0, 1, 0, 1))
    space = FeSpace(mesh, 2)
    rule = gauss_rule(1, 2)  # single point at the reference center
    vals2, _ = eval_basis(space, 0, rule)
    center_local = 1 + 3 * 1  # tensor index (a=1, b=1)
    expected = np.zeros(9)
    expected[center_local] = 1.0
    assert vals2[0] == pytest.approx(expected, abs=1e-15)


def test_interpolate_constant_and_coordinate():
    mesh = build_mesh(4, 3, (0, 1, 0, 1))
    for degree in (1, 2):
        space = FeSpace(mesh, degree)
        ones = interpolate(space, parse("1"))
        assert np.allclose(ones.coeffs, 1.0)
        xs = interpolate(space, parse("x"))
        assert np.allclose(xs.coeffs, space.node_coords()[:, 0])


def test_interpolation_error_smooth_function():
    mesh = build_mesh(8, 8, (0, 1, 0, 1))
    space = FeSpace(mesh, 2)
    u = interpolate(space, parse("sin(pi*y)"))
    # nodal values are exact by construction
    coords = space.node_coords()
    assert np.allclose(u.coeffs, np.sin(np.pi * coords[:, 1]), atol=1e-15)
    # refined-quadrature L2 error oracle
    rule = gauss_rule(6, 2)
    vals, _ = space.tabulate(rule)
    pts, w = space.quad_points(rule)
    err = u.cell_values(vals) - np.sin(np.pi * pts[..., 1])
    l2 = np.sqrt(np.einsum("q,cq->", w, err * err))
    assert l2 <= 1e-3


@pytest.mark.parametrize("degree,expr_text", [(1, "x*y"), (2, "x^2*y^2"),
                                              (2, "(x^2-x)*(2*y^2+1)")])
def test_interpolation_reproduces_tensor_polynomials(degree, expr_text):
    mesh = build_mesh(3, 2, (0, 1, 0, 1))
    space = FeSpace(mesh, degree)
    tree = parse(expr_text)
    u = interpolate(space, tree)
    rule = gauss_rule(4, 2)
    vals, _ = space.tabulate(rule)
    pts, _ = space.quad_points(rule)
    from friedls.expr import evaluate

    exact = evaluate(tree, pts[..., 0], pts[..., 1])
    assert np.allclose(u.cell_values(vals), exact, atol=1e-13)


def test_c0_continuity_across_shared_edge():
    mesh = build_mesh(2, 1, (0, 1, 0, 1))
    space = FeSpace(mesh, 2)
    rng = np.random.default_rng(3)
    u = FeFunction(space, rng.standard_normal(space.n_dofs))
    rule = gauss_rule(5, 1)
    # shared edge: right side of cell 0, left side of cell 1
    right = space.tabulate_side("right", rule) @ u.coeffs[space.cell_dofs(0)]
    left = space.tabulate_side("left", rule) @ u.coeffs[space.cell_dofs(1)]
    assert np.allclose(right, left, atol=1e-13)


def test_facet_trace_values():
    mesh = build_mesh(4, 4, (0, 1, 0, 1))
    space = FeSpace(mesh, 2)
    rule = gauss_rule(4, 1)
    facets = [f for f in mesh.boundary_facets() if f.side == "left"]

    ones = interpolate(space, parse("1"))
    xs = interpolate(space, parse("x"))
    sin_y = interpolate(space, parse("sin(pi*y)"))
    norm_sq = 0.0
    for facet in facets:
        trace = facet_trace(space, facet, rule)
        dofs = space.cell_dofs(facet.cell)
        assert np.allclose(trace @ ones.coeffs[dofs], 1.0, atol=1e-14)
        assert np.allclose(trace @ xs.coeffs[dofs], 0.0, atol=1e-14)
        _, wts = facet.quad_points(rule)
        vals = trace @ sin_y.coeffs[dofs]
        norm_sq += float(wts @ (vals * vals))
    oracle, _ = quad(lambda y: np.sin(np.pi * y) ** 2, 0.0, 1.0)
    # norm of the nodal interpolant: off by the interpolation error
    assert norm_sq == pytest.approx(oracle, abs=1e-3)
    assert oracle == pytest.approx(0.5)


def test_block_layout_component_contiguous():
    mesh = build_mesh(2, 2, (0, 1, 0, 1))
    space = FeSpace(mesh, 1, n_components=3)
    u = interpolate(space, [parse("1"), parse("2"), parse("3")])
    assert np.allclose(u.coeffs[0::3], 1.0)
    assert np.allclose(u.coeffs[1::3], 2.0)
    assert np.allclose(u.coeffs[2::3], 3.0)
    assert u.coeffs[:3] == pytest.approx([1.0, 2.0, 3.0])
