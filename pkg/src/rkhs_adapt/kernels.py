"""Reproducing-kernel constructions on one-dimensional domains.

Two families are provided:

* :class:`GaussianKernel` — ``k(u, v) = exp(-|u - v|^2 / (2 sigma^2))``,
  periodized on circular domains by summing the three nearest periodic
  images of the wrapped difference.
* :class:`MultiscaleKernel` — a truncated multiresolution kernel built
  from normalized B-spline scaling functions,
  ``k(u, v) = sum_{j=0}^{J} 2^(-2 r j) sum_k phi_jk(u) phi_jk(v)`` with
  ``phi_jk(x) = 2^(j/2) N(2^j x - k)``, where ``N`` is the order-1 box
  (indicator of ``[0, 1)``) or the order-2 hat (on ``[0, 2]``).

Kernels are immutable after construction and evaluation is pure, so they
are safe to share across threads.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kern
from .errors import DuplicateCenters

__all__ = [
    "BSplineScaling",
    "Domain1D",
    "GaussianKernel",
    "MultiscaleKernel",
    "embedding_constant",
    "grammian",
    "kernel_eval",
    "kernel_section",
    "level_contributions",
    "level_weights",
]

DEFAULT_SMOOTHNESS = {1: 0.6, 2: 1.5}


@dataclass(frozen=True)
class Domain1D:
    """A one-dimensional arc-length domain ``[0, length)``.

    ``periodic=True`` identifies ``0`` with ``length`` (a circle of
    circumference ``length``); otherwise the domain is the closed box
    ``[0, length]`` and out-of-range coordinates are clamped.
    """

    length: float
    periodic: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.length) and self.length > 0.0):
            raise ValueError(f"domain length must be > 0, got {self.length}")

    def wrap(self, x):
        """Reduce coordinates into the domain (modulo or clamp)."""
        x = np.asarray(x, dtype=float)
        if self.periodic:
            out = np.mod(x, self.length)
        else:
            out = np.clip(x, 0.0, self.length)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GaussianKernel:
    """Gaussian kernel ``exp(-|u - v|^2 / (2 sigma^2))`` on a 1-D domain.

    The alternative normalization ``exp(-|u - v|^2 / sigma^2)`` is this
    kernel evaluated with width ``sigma / sqrt(2)``.  On a periodic
    domain the kernel is the sum over the nearest periodic images of the
    difference.
    """

    sigma: float
    domain: Domain1D

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    @property
    def kind_code(self):
        return _kern.KIND_GAUSSIAN

    @cached_property
    def params(self):
        p = np.array(
            [self.sigma, self.domain.length, 1.0 if self.domain.periodic else 0.0]
        )
        p.setflags(write=False)
        return p

    def same_as(self, other):
        return (
            isinstance(other, GaussianKernel)
            and self.sigma == other.sigma
            and self.domain == other.domain
        )


@dataclass(frozen=True)
class MultiscaleKernel:
    """Truncated multiscale B-spline kernel on a 1-D domain.

    Parameters
    ----------
    order : int
        B-spline order, 1 (box) or 2 (hat).
    smoothness : float or None
        Exponent ``r`` of the level weights ``2^(-2 r j)``; must exceed
        ``1/2`` (half the domain dimension).  ``None`` selects the
        per-order default (0.6 for order 1, 1.5 for order 2).
    max_level : int
        Truncation level ``J``; levels ``0..J`` are summed.  The omitted
        tail is geometrically small: bounded by
        ``2^(-2 r (J+1)) / (1 - 2^(-2 r))`` times the squared sup of the
        level-0 part.
    domain : Domain1D
    unit : float
        Physical length of one integer knot spacing at level 0.  On
        periodic domains ``length / unit`` must be an integer >= twice
        the order so the wrap-around periodization is exact.
    """

    order: int
    domain: Domain1D
    smoothness: float | None = None
    max_level: int = 4
    unit: float = 1.0

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order}")
        if self.smoothness is None:
            object.__setattr__(
                self, "smoothness", DEFAULT_SMOOTHNESS[self.order]
            )
        if not (math.isfinite(self.smoothness) and self.smoothness > 0.5):
            raise ValueError(
                f"smoothness must exceed 0.5, got {self.smoothness}"
            )
        if self.max_level < 0:
            raise ValueError(f"max_level must be >= 0, got {self.max_level}")
        if not (math.isfinite(self.unit) and self.unit > 0.0):
            raise ValueError(f"unit must be > 0, got {self.unit}")
        if self.domain.periodic:
            knots = self.domain.length / self.unit
            if abs(knots - round(knots)) > 1e-9 * max(knots, 1.0):
                raise ValueError(
                    "periodic domains need an integer number of level-0 "
                    f"knots per period; length/unit = {knots!r}"
                )
            if round(knots) < 2 * self.order:
                raise ValueError(
                    "periodic domains need at least 2*order knots per "
                    f"period, got {round(knots)}"
                )

    @property
    def kind_code(self):
        return _kern.KIND_MULTISCALE

    @cached_property
    def params(self):
        p = np.array(
            [
                float(self.order),
                self.smoothness,
                float(self.max_level),
                self.domain.length,
                1.0 if self.domain.periodic else 0.0,
                self.unit,
            ]
        )
        p.setflags(write=False)
        return p

    def same_as(self, other):
        return (
            isinstance(other, MultiscaleKernel)
            and self.order == other.order
            and self.smoothness == other.smoothness
            and self.max_level == other.max_level
            and self.unit == other.unit
            and self.domain == other.domain
        )


@dataclass(frozen=True)
class BSplineScaling:
    """One translated dilate ``phi_{j,k}(x) = 2^(j/2) N(2^j x - k)`` of a
    normalized B-spline, in knot units.

    Nonnegative everywhere; identically zero outside the support
    ``[k * 2^-j, (k + order) * 2^-j]``.
    """

    order: int
    level: int
    shift: int

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order}")
        if self.level < 0:
            raise ValueError(f"level must be >= 0, got {self.level}")

    @property
    def support(self):
        scale = 2.0**-self.level
        return (self.shift * scale, (self.shift + self.order) * scale)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xs = np.atleast_1d(x)
        amp = 2.0 ** (self.level / 2.0)
        out = np.empty_like(xs)
        for i, xi in enumerate(xs):
            out[i] = amp * _kern.bspline_value(
                self.order, (2.0**self.level) * xi - self.shift
            )
        return float(out[0]) if scalar else out


def kernel_eval(kernel, u, v):
    """Kernel value ``k(u, v)``.

    Coordinates are reduced into the domain first (wrapped when periodic,
    clamped otherwise).  The implementation computes a symmetric
    expression, so ``kernel_eval(k, u, v) == kernel_eval(k, v, u)``
    bit-exactly.
    """
    return float(
        _kern.kernel_value(kernel.kind_code, kernel.params, float(u), float(v))
    )


def kernel_section(kernel, x):
    """The kernel function centered at ``x``: ``y -> k(x, y)``."""
    x = float(x)

    def section(y):
        return kernel_eval(kernel, x, y)

    return section


def embedding_constant(kernel, grid_size=1024):
    """Max of ``sqrt(k(x, x))`` over a uniform grid of the domain.

    This is the constant ``C`` in the uniform bound
    ``|f(x)| <= C * ||f||`` for all grid points ``x``.  For the Gaussian
    kernel the value is exactly 1.0 whenever periodic images are
    negligible at working precision.
    """
    if grid_size < 2:
        raise ValueError(f"grid_size must be >= 2, got {grid_size}")
    L = kernel.domain.length
    if kernel.domain.periodic:
        grid = np.arange(grid_size) * (L / grid_size)
    else:
        grid = np.linspace(0.0, L, grid_size)
    best = 0.0
    for x in grid:
        val = _kern.kernel_value(kernel.kind_code, kernel.params, x, x)
        if val > best:
            best = val
    return math.sqrt(best)


def check_distinct_centers(kernel_or_domain, centers):
    """Raise :class:`DuplicateCenters` if two centers coincide within
    ``1e-12 * length`` (circular distance on periodic domains)."""
    domain = getattr(kernel_or_domain, "domain", kernel_or_domain)
    centers = np.asarray(centers, dtype=float)
    if centers.size < 2:
        return
    wrapped = domain.wrap(centers)
    order = np.argsort(wrapped, kind="stable")
    sw = wrapped[order]
    gaps = np.diff(sw)
    min_gap = gaps.min() if gaps.size else math.inf
    if domain.periodic:
        wrap_gap = sw[0] + domain.length - sw[-1]
        min_gap = min(min_gap, wrap_gap)
    if min_gap < 1e-12 * domain.length:
        raise DuplicateCenters(
            f"two centers coincide within 1e-12*L (gap {min_gap:.3e})"
        )


def grammian(kernel, centers):
    """Grammian matrix ``K[i, j] = k(x_i, x_j)`` over a center set.

    Symmetric by construction; positive semidefinite because the kernel
    is.  Raises :class:`DuplicateCenters` when two centers coincide
    within ``1e-12 * length``.
    """
    centers = np.asarray(centers, dtype=float)
    if centers.ndim != 1:
        raise ValueError("centers must be a 1-D sequence")
    check_distinct_centers(kernel, centers)
    n = centers.size
    K = np.empty((n, n))
    _kern.gram_into(kernel.kind_code, kernel.params, centers, K)
    return K


def cross_grammian(kernel, xs, ys):
    """Rectangular kernel matrix ``C[i, j] = k(xs[i], ys[j])``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    C = np.empty((xs.size, ys.size))
    _kern.cross_gram_into(kernel.kind_code, kernel.params, xs, ys, C)
    return C


def level_weights(kernel):
    """Per-level weights ``2^(-2 r j)``, ``j = 0..max_level``, of a
    multiscale kernel."""
    if not isinstance(kernel, MultiscaleKernel):
        raise TypeError("level_weights applies to MultiscaleKernel only")
    j = np.arange(kernel.max_level + 1, dtype=float)
    return 2.0 ** (-2.0 * kernel.smoothness * j)


def level_contributions(kernel, u, v):
    """Weighted per-level terms of a multiscale kernel at ``(u, v)``.

    The entries sum to ``kernel_eval(kernel, u, v)``; entry ``j`` is the
    level-``j`` part including its ``2^(-2 r j)`` weight.
    """
    if not isinstance(kernel, MultiscaleKernel):
        raise TypeError("level_contributions applies to MultiscaleKernel only")
    out = np.empty(kernel.max_level + 1)
    prev = 0.0
    for j in range(kernel.max_level + 1):
        truncated = MultiscaleKernel(
            order=kernel.order,
            domain=kernel.domain,
            smoothness=kernel.smoothness,
            max_level=j,
            unit=kernel.unit,
        )
        total = kernel_eval(truncated, u, v)
        out[j] = total - prev
        prev = total
    return out
