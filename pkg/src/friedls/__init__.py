"""Least-squares solvers and certification for first-order systems.

Three model problems are covered: steady advection-reaction, an elliptic
equation in first-order form with an interpolated Robin condition, and the
acoustic wave equation on a space-time slab with weakly imposed boundary
and initial conditions.  In every case the test space is a tuple of L2
spaces, so the residual's dual norm is a computable weighted L2 norm and
the discrete problem is a symmetric positive definite least-squares
system.  The package certifies the associated inf-sup lower bounds,
stability constants, integration-by-parts identities, and a fractional
boundary-norm multiplier bound.
"""

__version__ = "0.1.0"
