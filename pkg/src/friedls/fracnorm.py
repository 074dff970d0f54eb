"""Half-order Sobolev norms on the boundary curve of a space-time rectangle.

The closed boundary of [0,1] x [0,tau] is parametrized by arclength with
period P = 2 (1 + tau) and split into uniform panels per side.  The squared
norm is the boundary L2 norm plus the double-integral seminorm with kernel
|u(x) - u(y)|^2 / |x - y|^2 (chordal distances in the plane).  The double
integral uses a product Gauss rule with g points in one slot and g+1 in
the other, so quadrature points never coincide and the bounded (Lipschitz)
diagonal needs no special transform; accuracy is validated by panel
refinement, not claimed a priori.

The module also provides the Lipschitz extension of the lateral normal to
the whole curve and the two-component multiplier fields built from it,
whose half-norm ratios instantiate the boundedness of multiplication by a
Hoelder function with exponent above one half.
"""

import numpy as np

from .errors import ConfigError
from .quadrature import gauss_rule


class BoundaryCurve:
    """Arclength-parametrized boundary of [0,1] x [0,tau] with Gauss panels."""

    def __init__(self, tau=1.0, n_panels=32, gauss_points=4):
        if tau <= 0:
            raise ConfigError(f"tau must be positive, got {tau}")
        if n_panels < 4:
            raise ConfigError("need at least one panel per side")
        self.tau = float(tau)
        self.side_lengths = (1.0, self.tau, 1.0, self.tau)
        self.period = 2.0 * (1.0 + self.tau)
        counts = [max(1, round(n_panels * L / self.period))
                  for L in self.side_lengths]
        self.panel_counts = tuple(counts)
        self.n_panels = sum(counts)
        edges = [0.0]
        start = 0.0
        for L, c in zip(self.side_lengths, counts):
            for k in range(1, c + 1):
                edges.append(start + L * k / c)
            start += L
        self.panel_edges = np.array(edges)
        self._rule_a = gauss_rule(gauss_points, 1)
        self._rule_b = gauss_rule(gauss_points + 1, 1)
        self.s_a, self.w_a = self._panel_points(self._rule_a)
        self.s_b, self.w_b = self._panel_points(self._rule_b)

    def _panel_points(self, rule):
        s0 = self.panel_edges[:-1]
        s1 = self.panel_edges[1:]
        mid = 0.5 * (s0 + s1)
        half = 0.5 * (s1 - s0)
        pts = (mid[:, None] + half[:, None] * rule.points[None, :]).ravel()
        wts = (half[:, None] * rule.weights[None, :]).ravel()
        return pts, wts

    def point(self, s):
        """Map arclength (mod period) to coordinates on the rectangle."""
        s = np.mod(np.asarray(s, dtype=float), self.period)
        tau = self.tau
        x = np.empty_like(s)
        y = np.empty_like(s)
        bottom = s < 1.0
        right = (s >= 1.0) & (s < 1.0 + tau)
        top = (s >= 1.0 + tau) & (s < 2.0 + tau)
        left = s >= 2.0 + tau
        x[bottom], y[bottom] = s[bottom], 0.0
        x[right], y[right] = 1.0, s[right] - 1.0
        x[top], y[top] = 1.0 - (s[top] - 1.0 - tau), tau
        x[left], y[left] = 0.0, tau - (s[left] - 2.0 - tau)
        return np.column_stack([x, y])


def _values(fn, s):
    vals = np.asarray(fn(s), dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    if not np.all(np.isfinite(vals)):
        raise ConfigError("boundary function produced non-finite values")
    return vals


def seminorm_sq(curve, fn, transpose=False):
    """Squared double-integral seminorm by the mixed product rule.

    With transpose=True the roles of the two point sets swap; kernel
    symmetry makes both orderings agree to machine precision.
    """
    sa, wa, sb, wb = curve.s_a, curve.w_a, curve.s_b, curve.w_b
    if transpose:
        sa, wa, sb, wb = sb, wb, sa, wa
    xa = curve.point(sa)
    xb = curve.point(sb)
    ua = _values(fn, sa)
    ub = _values(fn, sb)
    dist_sq = ((xa[:, None, :] - xb[None, :, :]) ** 2).sum(axis=2)
    diff_sq = ((ua[:, None, :] - ub[None, :, :]) ** 2).sum(axis=2)
    return float(np.einsum("i,j,ij->", wa, wb, diff_sq / dist_sq))


def gagliardo_half_norm(curve, fn):
    """Half-norm of a scalar or componentwise vector boundary function.

    Returns (norm, l2_part_sq, seminorm_sq).
    """
    ua = _values(fn, curve.s_a)
    l2_sq = float(np.einsum("i,ic->", curve.w_a, ua * ua))
    semi_sq = seminorm_sq(curve, fn)
    return float(np.sqrt(l2_sq + semi_sq)), l2_sq, semi_sq


def normal_extension(curve):
    """Lipschitz extension of the lateral outward normal to the whole curve.

    Equals -1 on the x=0 side, +1 on the x=1 side, and interpolates
    linearly (2x - 1) along the bottom and top; global Lipschitz constant
    2 with respect to chordal distance.
    """
    def nstar(s):
        pts = curve.point(s)
        return 2.0 * pts[:, 0] - 1.0

    return nstar


def multiplier_field(curve, c0, sign):
    """Two-component field (n*, +-1) / sqrt(2 c0) along the curve."""
    if c0 <= 0:
        raise ConfigError(f"c0 must be positive, got {c0}")
    nstar = normal_extension(curve)
    scale = 1.0 / np.sqrt(2.0 * c0)

    def h(s):
        s = np.asarray(s, dtype=float)
        return np.column_stack([scale * nstar(s),
                                np.full(s.shape, sign * scale)])

    return h


def multiplier_ratio(curve, fn, sign, c0=1.0):
    """Half-norm amplification of fn under the multiplier field."""
    norm_u, _, _ = gagliardo_half_norm(curve, fn)
    if norm_u == 0.0:
        raise ConfigError("multiplier ratio undefined for the zero function")
    h = multiplier_field(curve, c0, sign)

    def hu(s):
        return h(s) * _values(fn, s)

    norm_hu, _, _ = gagliardo_half_norm(curve, hu)
    return norm_hu / norm_u


def lipschitz_quotient(curve, fn, n_samples=256):
    """Max pairwise difference quotient over chordal distance."""
    s = np.linspace(0.0, curve.period, n_samples, endpoint=False)
    pts = curve.point(s)
    vals = _values(fn, s)
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    diff = np.sqrt(((vals[:, None, :] - vals[None, :, :]) ** 2).sum(axis=2))
    iu = np.triu_indices(n_samples, k=1)
    return float((diff[iu] / dist[iu]).max())


def standard_test_functions(curve):
    """Five Lipschitz probes spanning smooth, kinked, and near-sawtooth."""
    P = curve.period
    smooth_width = P / 32.0  # fixed so the probe is refinement independent

    def hat(s):
        s = np.mod(np.asarray(s, dtype=float), P)
        return np.maximum(0.0, 1.0 - np.abs(s - P / 4.0) / (P / 4.0))

    def sawtooth_smoothed(s):
        s = np.mod(np.asarray(s, dtype=float), P)
        w = smooth_width
        # linear ramp w/P .. 1 - w/P on [w, P-w]; the jump at s = 0 is
        # bridged linearly through the midpoint value 1/2 over width w
        mid = w / P + (s - w) * (1.0 - 2.0 * w / P) / (P - 2.0 * w)
        edge_lo = 0.5 + s * (w / P - 0.5) / w
        edge_hi = (1.0 - w / P) + (s - (P - w)) * (w / P - 0.5) / w
        return np.where(s < w, edge_lo, np.where(s > P - w, edge_hi, mid))

    return [
        ("constant", lambda s: np.ones(np.asarray(s, dtype=float).shape)),
        ("sin", lambda s: np.sin(2.0 * np.pi * np.asarray(s, dtype=float) / P)),
        ("cos", lambda s: np.cos(2.0 * np.pi * np.asarray(s, dtype=float) / P)),
        ("hat", hat),
        ("sawtooth", sawtooth_smoothed),
    ]
