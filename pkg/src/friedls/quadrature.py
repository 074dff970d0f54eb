"""Gauss-Legendre rules on the reference interval [-1,1] and square [-1,1]^2.

Nodes and weights come from the Golub-Welsch eigendecomposition of the
Jacobi matrix, so an n-point rule integrates polynomials of degree 2n-1
exactly.  2D rules are tensor products of the 1D rule.
"""

from dataclasses import dataclass

import numpy as np

MAX_POINTS = 12


@dataclass(frozen=True)
class QuadRule:
    """Reference-domain quadrature rule.

    points has shape (nq,) in 1D and (nq, 2) in 2D; weights sum to the
    reference measure (2 in 1D, 4 in 2D).
    """

    points: np.ndarray
    weights: np.ndarray
    dim: int


def _gauss_nodes_1d(n):
    if n == 1:
        return np.array([0.0]), np.array([2.0])
    k = np.arange(1, n)
    sub = k / np.sqrt(4.0 * k * k - 1.0)
    jacobi = np.diag(sub, -1) + np.diag(sub, 1)
    nodes, vectors = np.linalg.eigh(jacobi)
    weights = 2.0 * vectors[0, :] ** 2
    # symmetrize against eigensolver roundoff
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return nodes, weights


def gauss_rule(n, dim=1):
    """n-point Gauss-Legendre rule; tensor-product rule for dim=2."""
    if not 1 <= n <= MAX_POINTS:
        raise ValueError(f"point count {n} outside 1..{MAX_POINTS}")
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    nodes, weights = _gauss_nodes_1d(n)
    if dim == 1:
        return QuadRule(nodes, weights, 1)
    px, py = np.meshgrid(nodes, nodes, indexing="ij")
    points = np.column_stack([px.ravel(), py.ravel()])
    wx, wy = np.meshgrid(weights, weights, indexing="ij")
    return QuadRule(points, (wx * wy).ravel(), 2)
