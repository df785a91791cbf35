"""Finite kernel expansions: evaluation, inner products, norms, and
orthogonal projection onto the span of kernel sections.

An :class:`RkhsExpansion` represents ``f = sum_i alpha_i k(x_i, .)``.
Inner products between expansions are exact by bilinearity — they reduce
to quadratic forms with (cross-)Grammian matrices; no quadrature is ever
used.  Expansions are immutable and all operations are pure.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import IllConditioned, KernelMismatch
from .kernels import (
    check_distinct_centers,
    cross_grammian,
    grammian,
)
from .linops import condition_number_2, solve_spd

__all__ = [
    "RkhsExpansion",
    "eval_vector",
    "evaluate",
    "inner_product",
    "norm",
    "project",
]

CONDITION_WARN_THRESHOLD = 1e14


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RkhsExpansion:
    """A finite expansion ``f = sum_i coefficients[i] * k(centers[i], .)``."""

    kernel: object
    centers: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        centers = _readonly(np.atleast_1d(self.centers))
        coefficients = _readonly(np.atleast_1d(self.coefficients))
        if centers.ndim != 1 or coefficients.ndim != 1:
            raise ValueError("centers and coefficients must be 1-D")
        if centers.size != coefficients.size:
            raise ValueError(
                f"length mismatch: {centers.size} centers vs "
                f"{coefficients.size} coefficients"
            )
        if not (
            np.all(np.isfinite(centers)) and np.all(np.isfinite(coefficients))
        ):
            raise ValueError("centers and coefficients must be finite")
        check_distinct_centers(self.kernel, centers)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def n(self):
        return self.centers.size

    def __call__(self, x):
        return evaluate(self, x)


def eval_vector(kernel, centers, x):
    """The vector ``(k(x_1, x), ..., k(x_n, x))``.

    This is the coordinate form of the evaluation functional restricted
    to the span of the sections: ``f(x) = coefficients . eval_vector``.
    Transposed, the same vector represents the adjoint map sending a
    scalar ``a`` to the function ``a * k(x, .)``.
    """
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    if centers.size == 0:
        return np.empty(0)
    return cross_grammian(kernel, centers, float(x))[:, 0]


def evaluate(f, x):
    """Point value ``f(x) = sum_i alpha_i k(x_i, x)``.

    Accepts a scalar or an array of query points.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    C = cross_grammian(f.kernel, np.atleast_1d(x), f.centers)
    vals = C @ f.coefficients
    return float(vals[0]) if scalar else vals


def inner_product(f, g):
    """Hilbert-space inner product of two expansions with a shared kernel:
    ``alpha_f^T K_fg alpha_g`` with ``K_fg[i, j] = k(x_i^f, x_j^g)``."""
    if not f.kernel.same_as(g.kernel):
        raise KernelMismatch("expansions use different kernels")
    C = cross_grammian(f.kernel, f.centers, g.centers)
    return float(f.coefficients @ C @ g.coefficients)


def norm(f):
    """Hilbert-space norm ``sqrt((f, f))``, clamped at zero against
    rounding-induced tiny negatives."""
    return float(np.sqrt(max(inner_product(f, f), 0.0)))


def project(g, kernel, centers, ridge=0.0):
    """Orthogonal projection of ``g`` onto ``span{k(x_i, .)}``.

    Solves ``K beta = c`` where ``c_i = (k(x_i, .), g)``.  When ``g`` is
    an expansion, the reproducing property gives ``c_i = g(x_i)`` exactly;
    when ``g`` is a plain callable, its point values are used, which
    yields the kernel interpolant (the projection whenever ``g`` lies in
    the space).

    Emits an :class:`IllConditioned` warning (not a failure) when the
    Grammian condition number exceeds 1e14; an optional ``ridge`` is
    added to the Grammian diagonal before solving.
    """
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    K = grammian(kernel, centers)
    cond = condition_number_2(K)
    if cond > CONDITION_WARN_THRESHOLD:
        warnings.warn(
            f"Grammian condition number {cond:.3e} exceeds "
            f"{CONDITION_WARN_THRESHOLD:.0e}; projection may be inaccurate",
            IllConditioned,
            stacklevel=2,
        )
    if isinstance(g, RkhsExpansion):
        if not g.kernel.same_as(kernel):
            raise KernelMismatch("expansion kernel differs from target kernel")
        c = evaluate(g, centers)
    elif callable(g):
        c = np.array([float(g(x)) for x in centers])
    else:
        raise TypeError(
            "g must be an RkhsExpansion or a callable providing point values"
        )
    beta = solve_spd(K, c, ridge=ridge)
    return RkhsExpansion(kernel, centers, beta)
