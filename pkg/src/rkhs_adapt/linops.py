"""Small dense linear-algebra services: Lyapunov solves, 2-norm condition
numbers, and symmetric positive-definite solves.

Everything here targets the small matrices of this package (state
dimension <= 5, Grammians up to a few hundred); simplicity and exact
postconditions are preferred over scalability.
"""

import math

import numpy as np

from .errors import NotHurwitz, NotPositiveDefinite, NotSymmetric

__all__ = [
    "assert_hurwitz",
    "condition_number_2",
    "hurwitz_margin",
    "solve_lyapunov",
    "solve_spd",
]

HURWITZ_TOL = -1e-12


def _as_square(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def hurwitz_margin(A):
    """Largest eigenvalue real part of ``A`` (negative iff Hurwitz)."""
    A = _as_square(A, "A")
    return float(np.linalg.eigvals(A).real.max())


def assert_hurwitz(A, tol=HURWITZ_TOL):
    """Raise :class:`NotHurwitz` unless every eigenvalue of ``A`` has real
    part strictly below ``tol``."""
    margin = hurwitz_margin(A)
    if margin >= tol:
        raise NotHurwitz(
            f"matrix has eigenvalue real part {margin:.6g} >= {tol:.6g}"
        )
    return margin


def solve_lyapunov(A, Q):
    """Solve ``A^T P + P A = -Q`` for the symmetric matrix ``P``.

    ``A`` must be Hurwitz and ``Q`` symmetric (positive definite for the
    returned ``P`` to be positive definite).  The equation is vectorized
    into a ``(d^2, d^2)`` linear system via Kronecker products, which is
    the simplest correct method at this scale.

    Parameters
    ----------
    A, Q : (d, d) array_like

    Returns
    -------
    (d, d) ndarray
        Symmetric solution ``P``.

    Raises
    ------
    NotHurwitz
        If any eigenvalue of ``A`` has real part >= -1e-12.
    NotSymmetric
        If ``||Q - Q^T||_F > 1e-12 * ||Q||_F``.
    """
    A = _as_square(A, "A")
    Q = _as_square(Q, "Q")
    if A.shape != Q.shape:
        raise ValueError(f"shape mismatch: A {A.shape} vs Q {Q.shape}")
    assert_hurwitz(A)
    qnorm = np.linalg.norm(Q)
    if np.linalg.norm(Q - Q.T) > 1e-12 * max(qnorm, 1e-300):
        raise NotSymmetric("Q is not symmetric to 1e-12 relative")

    d = A.shape[0]
    # Column-major vec identity: vec(A^T P) = (I (x) A^T) vec(P) and
    # vec(P A) = (A^T (x) I) vec(P).
    lhs = np.kron(np.eye(d), A.T) + np.kron(A.T, np.eye(d))
    p = np.linalg.solve(lhs, -Q.flatten(order="F"))
    P = p.reshape((d, d), order="F")
    return (P + P.T) / 2.0


def condition_number_2(M):
    """2-norm condition number ``sigma_max / sigma_min`` of ``M``.

    Returns ``math.inf`` when the smallest singular value is below
    1e-300 (numerically singular).
    """
    M = _as_square(M, "M")
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] < 1e-300:
        return math.inf
    return float(s[0] / s[-1])


def solve_spd(M, b, ridge=0.0):
    """Solve ``M y = b`` for symmetric positive-definite ``M``.

    Parameters
    ----------
    M : (n, n) array_like
        Symmetric positive definite up to tolerance.
    b : (n,) array_like
    ridge : float, optional
        Nonnegative diagonal shift added to ``M`` before solving.

    Raises
    ------
    NotSymmetric
        If ``M`` is grossly asymmetric (relative Frobenius defect > 1e-8).
    NotPositiveDefinite
        If the (possibly ridged) matrix has a nonpositive Cholesky pivot.
    """
    M = _as_square(M, "M")
    b = np.asarray(b, dtype=float)
    if b.shape != (M.shape[0],):
        raise ValueError(f"b has shape {b.shape}, expected ({M.shape[0]},)")
    if not np.all(np.isfinite(b)):
        raise ValueError("b has non-finite entries")
    if ridge < 0.0:
        raise ValueError("ridge must be >= 0")
    mnorm = np.linalg.norm(M)
    if np.linalg.norm(M - M.T) > 1e-8 * max(mnorm, 1e-300):
        raise NotSymmetric("matrix is not symmetric to 1e-8 relative")

    Ms = (M + M.T) / 2.0
    if ridge > 0.0:
        Ms = Ms + ridge * np.eye(Ms.shape[0])
    try:
        np.linalg.cholesky(Ms)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(
            "matrix has a nonpositive pivot"
            + ("" if ridge == 0.0 else f" even with ridge {ridge:g}")
        ) from None
    return np.linalg.solve(Ms, b)
