"""SPD solves and smallest generalized eigenvalue extraction.

Matrices are dense below DENSE_LIMIT dofs and CSR above.  One-shot solves
use dense Cholesky or Jacobi-preconditioned CG; the eigenvalue iteration
and multi-solve sweeps reuse a single direct factorization (dense Cholesky
or sparse LU), which keeps the certification runs within their time budget.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import EigenConvergenceError, SolverError

DENSE_LIMIT = 3000
SYMMETRY_TOL = 1e-13


class SymMatrix:
    """Symmetric matrix with dense/sparse storage chosen by size."""

    def __init__(self, data, symmetrize=True):
        self.dense = not sp.issparse(data)
        self.data = data
        self.dim = data.shape[0]
        if symmetrize:
            if self.dense:
                self.data = 0.5 * (data + data.T)
            else:
                self.data = (0.5 * (data + data.T)).tocsr()
        self._check_symmetry()

    @classmethod
    def from_coo(cls, dim, rows, cols, vals):
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
        mat = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
        if dim <= DENSE_LIMIT:
            return cls(mat.toarray())
        return cls(mat)

    def _check_symmetry(self):
        if self.dense:
            gap = np.abs(self.data - self.data.T).max()
            scale = np.abs(self.data).max()
        else:
            gap_mat = (self.data - self.data.T).tocoo()
            gap = np.abs(gap_mat.data).max() if gap_mat.nnz else 0.0
            scale = np.abs(self.data.data).max() if self.data.nnz else 0.0
        if scale > 0 and gap > SYMMETRY_TOL * scale:
            raise SolverError(f"matrix not symmetric: gap {gap:.3e} vs scale {scale:.3e}")

    def matvec(self, x):
        return self.data @ x

    def diagonal(self):
        return self.data.diagonal() if not self.dense else np.diag(self.data)

    def trace(self):
        return float(self.diagonal().sum())

    def toarray(self):
        return self.data if self.dense else self.data.toarray()

    def add_scaled(self, other, factor):
        return SymMatrix(self.data + factor * other.data, symmetrize=False)


def _jacobi_cg(A, b, tol, max_iter):
    """Conjugate gradients with diagonal preconditioning; detects non-SPD."""
    diag = A.diagonal().copy()
    if np.any(diag <= 0):
        raise SolverError("non-positive diagonal entry; matrix is not SPD")
    x = np.zeros_like(b)
    r = b.copy()
    z = r / diag
    p = z.copy()
    rz = r @ z
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return x, 0
    for it in range(1, max_iter + 1):
        Ap = A.matvec(p)
        pAp = p @ Ap
        if pAp <= 0:
            raise SolverError("negative curvature in CG; matrix is not SPD")
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) <= tol * b_norm:
            return x, it
        z = r / diag
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(f"CG iteration cap {max_iter} exceeded "
                      f"(residual {np.linalg.norm(r) / b_norm:.3e})")


def spd_solve(A, b, tol=1e-10):
    """Solve Ax=b for SPD A to relative residual tol."""
    b = np.asarray(b, dtype=float)
    if A.dense:
        try:
            factor = sla.cho_factor(A.data, check_finite=False)
        except sla.LinAlgError as exc:
            raise SolverError(f"Cholesky failed; matrix is not SPD ({exc})") from exc
        x = sla.cho_solve(factor, b, check_finite=False)
        # one refinement step keeps the residual at roundoff level even for
        # the ill-conditioned graph-norm systems
        x += sla.cho_solve(factor, b - A.matvec(x), check_finite=False)
    else:
        x, _ = _jacobi_cg(A, b, tol, max_iter=max(1000, 10 * A.dim))
    b_norm = np.linalg.norm(b)
    if b_norm > 0:
        rel = np.linalg.norm(A.matvec(x) - b) / b_norm
        if rel > tol:
            raise SolverError(f"solve residual {rel:.3e} exceeds tolerance {tol:.1e}")
    return x


class SpdFactor:
    """Reusable direct factorization: dense Cholesky or sparse LU."""

    def __init__(self, A):
        if A.dense:
            try:
                self._chol = sla.cho_factor(A.data, check_finite=False)
            except sla.LinAlgError as exc:
                raise SolverError(f"Cholesky failed; matrix is not SPD ({exc})") from exc
            self._lu = None
        else:
            try:
                self._lu = spla.splu(A.data.tocsc())
            except RuntimeError as exc:
                raise SolverError(f"sparse factorization failed ({exc})") from exc
            self._chol = None

    def solve(self, b):
        if self._chol is not None:
            return sla.cho_solve(self._chol, b, check_finite=False)
        if b.ndim == 1:
            return self._lu.solve(b)
        return np.column_stack([self._lu.solve(b[:, j]) for j in range(b.shape[1])])


@dataclass
class EigResult:
    lam_min: float
    eigvector: np.ndarray
    iterations: int
    residual: float

    @property
    def alpha(self):
        return float(np.sqrt(max(self.lam_min, 0.0)))


def min_gen_eig(B, M, tol=1e-6, max_iter=500, block_size=6, seed=0):
    """Smallest eigenvalue of B x = lambda M x, B symmetric PSD, M SPD.

    Blocked inverse power iteration on (B + sigma M, M) with a tiny shift
    to regularize semidefinite B; each sweep is one multi-right-hand-side
    solve against the cached factorization plus a Rayleigh-Ritz projection.
    The returned residual is ||B x - lambda M x|| / ||x||.
    """
    dim = B.dim
    sigma = 1e-12 * M.trace() / dim
    factor = SpdFactor(B.add_scaled(M, sigma))
    p = min(block_size, dim)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((dim, p))
    lam = None
    for it in range(1, max_iter + 1):
        X = factor.solve(M.matvec(X) if X.ndim == 1 else M.data @ X)
        # M-orthonormalize the block
        G = X.T @ (M.data @ X)
        try:
            C = sla.cholesky(G, lower=False, check_finite=False)
        except sla.LinAlgError:
            # block lost rank; reseed the offending directions
            X += 1e-8 * rng.standard_normal(X.shape)
            G = X.T @ (M.data @ X)
            C = sla.cholesky(G, lower=False, check_finite=False)
        X = sla.solve_triangular(C, X.T, trans="T", lower=False,
                                 check_finite=False).T
        H = X.T @ (B.data @ X)
        evals, evecs = np.linalg.eigh(0.5 * (H + H.T))
        lam = float(evals[0])
        x = X @ evecs[:, 0]
        resid = float(np.linalg.norm(B.matvec(x) - lam * M.matvec(x))
                      / np.linalg.norm(x))
        if resid <= tol:
            return EigResult(max(lam, 0.0), x, it, resid)
    raise EigenConvergenceError(
        f"eigen iteration cap {max_iter} reached (residual {resid:.3e}, "
        f"lambda {lam:.6e})")


@dataclass
class AssembledSystem:
    """Normal equations of one least-squares problem.

    operator is the SPD matrix of the data-free residual form, rhs its
    load vector, load_norm_sq the squared dual norm of the load, and
    gram_v the Gram matrix of the solution-space norm.
    """

    operator: SymMatrix
    rhs: np.ndarray
    load_norm_sq: float
    gram_v: SymMatrix

    @property
    def n_dofs(self):
        return self.operator.dim

    def solve(self, tol=1e-10, direct=False):
        if direct:
            return SpdFactor(self.operator).solve(self.rhs)
        return spd_solve(self.operator, self.rhs, tol)

    def residual_norm(self, x):
        """Dual norm of the least-squares residual at coefficients x."""
        value = x @ self.operator.matvec(x) - 2.0 * (self.rhs @ x) + self.load_norm_sq
        return float(np.sqrt(max(value, 0.0)))

    def v_norm(self, x):
        return float(np.sqrt(max(x @ self.gram_v.matvec(x), 0.0)))

    def load_norm(self):
        return float(np.sqrt(max(self.load_norm_sq, 0.0)))

    def infsup(self, tol=1e-6, max_iter=500):
        return min_gen_eig(self.operator, self.gram_v, tol=tol, max_iter=max_iter)
