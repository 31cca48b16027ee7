"""Dense symmetric positive-definite matrix kernels.

Cholesky-backed solves, inverses, log-determinants and rank-one inverse
updates.  All routines fail loudly on non-PD input instead of regularizing:
the learners only ever build PD matrices, so a Cholesky failure means a
caller bug, not a data problem.
"""

import numpy as np
import scipy.linalg


class NumericDegeneracyError(ArithmeticError):
    """Raised when a matrix that must be positive definite is not."""


def symmetrize(M):
    """Return (M + M.T)/2; stops asymmetry drift over many rank-one updates."""
    return (M + M.T) / 2.0


def cholesky_factor(M):
    """Lower Cholesky factor of an SPD matrix.

    Raises NumericDegeneracyError if the factorization fails.
    """
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise NumericDegeneracyError(
            f"Cholesky factorization failed ({exc}); matrix is not positive definite"
        ) from exc


def solve_spd(M, v):
    """Solve M w = v for SPD M via Cholesky.

    v may be a vector or a matrix of stacked right-hand sides.  One step
    of iterative refinement keeps the residual near machine precision for
    condition numbers up to ~1e8.
    """
    L = cholesky_factor(M)

    def backsolve(rhs):
        y = scipy.linalg.solve_triangular(L, rhs, lower=True)
        return scipy.linalg.solve_triangular(L.T, y, lower=False)

    w = backsolve(v)
    return w + backsolve(v - M @ w)


def spd_inverse(M):
    """Inverse of an SPD matrix via Cholesky; result is symmetrized."""
    L = cholesky_factor(M)
    Linv = scipy.linalg.solve_triangular(L, np.eye(M.shape[0]), lower=True)
    return symmetrize(Linv.T @ Linv)


def sherman_morrison_inverse(Minv, x):
    """Given Minv = M^{-1} for SPD M, return (M + x x^T)^{-1}.

    Uses (M + x x^T)^{-1} = Minv - (Minv x)(Minv x)^T / (1 + x^T Minv x).
    The denominator exceeds 1 for SPD Minv, so no error path exists.
    """
    w = Minv @ x
    return symmetrize(Minv - np.outer(w, w) / (1.0 + x @ w))


def log_det(M):
    """Natural log of det(M) for SPD M, via the Cholesky diagonal."""
    L = cholesky_factor(M)
    return 2.0 * float(np.sum(np.log(np.diag(L))))
