"""Scalar kernel-evaluation primitives.

These are the single source of truth for kernel values: the public kernel
API and the integration loop both call them.  All functions are plain
numerical code compiled by the active backend (see :mod:`._backend`).

Kernel kind codes and parameter-vector layouts
----------------------------------------------
``KIND_GAUSSIAN = 0``::

    params = [sigma, L, periodic_flag]

``KIND_MULTISCALE = 1``::

    params = [order, smoothness, max_level, L, periodic_flag, unit]

Coordinates are physical (same units as ``L``).  Multiscale evaluation
rescales by ``unit`` so one integer knot at refinement level 0 spans
``unit`` physical units.  For periodic domains the number of level-0
knots per period ``L / unit`` must be an integer (validated by the
public constructors), and kernels are periodized by summing periodic
images: the Gaussian over the three nearest images of the wrapped
difference, the compactly supported multiscale kernel over the one
wrap-around image that can touch.
"""

import math

from ._backend import jit

KIND_GAUSSIAN = 0
KIND_MULTISCALE = 1


@jit
def bspline_value(order, x):
    """Normalized B-spline ``N^order`` at ``x``.

    ``N^1`` is the indicator of ``[0, 1)``; ``N^2`` is the hat on
    ``[0, 2]`` (the convolution ``N^1 * N^1``).
    """
    if order == 1:
        if x >= 0.0 and x < 1.0:
            return 1.0
        return 0.0
    # order == 2
    if x < 0.0 or x >= 2.0:
        return 0.0
    if x < 1.0:
        return x
    return 2.0 - x


@jit
def multiscale_core(a, b, order, smoothness, max_level):
    """Multiscale kernel on the real line, in knot units.

    Sum over levels ``j = 0..max_level`` and all integer shifts ``k`` of
    ``2**(-2*smoothness*j) * phi_jk(a) * phi_jk(b)`` with
    ``phi_jk(x) = 2**(j/2) * N_order(2**j x - k)``.  Only shifts whose
    support contains both arguments contribute, so the inner sum has at
    most ``order`` terms.  Symmetric in ``(a, b)`` bit-exactly: the
    computation only depends on ``(min(a, b), max(a, b))``.
    """
    lo = a if a <= b else b
    hi = b if a <= b else a
    if hi - lo >= order:
        return 0.0
    total = 0.0
    for j in range(max_level + 1):
        twoj = 2.0**j
        aj = lo * twoj
        bj = hi * twoj
        fa = int(math.floor(aj))
        fb = int(math.floor(bj))
        kmin = fb - (order - 1)
        kmax = fa
        if kmax < kmin:
            continue
        level_sum = 0.0
        for k in range(kmin, kmax + 1):
            level_sum += bspline_value(order, aj - k) * bspline_value(
                order, bj - k
            )
        # 2**(-2 r j) level weight times 2**(j/2) from each factor.
        total += 2.0 ** ((1.0 - 2.0 * smoothness) * j) * level_sum
    return total


@jit
def kernel_value(kind, params, u, v):
    """Evaluate kernel ``kind`` with parameter vector ``params`` at (u, v).

    Implemented as a function of symmetric quantities only, so
    ``kernel_value(k, p, u, v) == kernel_value(k, p, v, u)`` bit-exactly.
    """
    if kind == KIND_GAUSSIAN:
        sigma = params[0]
        L = params[1]
        periodic = params[2] != 0.0
        inv2s2 = 1.0 / (2.0 * sigma * sigma)
        if periodic:
            r = u - v
            q = round(r / L)
            d = abs(r - q * L)
            return (
                math.exp(-d * d * inv2s2)
                + math.exp(-(d - L) * (d - L) * inv2s2)
                + math.exp(-(d + L) * (d + L) * inv2s2)
            )
        uu = min(max(u, 0.0), L)
        vv = min(max(v, 0.0), L)
        r = uu - vv
        return math.exp(-r * r * inv2s2)

    # multiscale
    order = int(params[0])
    smoothness = params[1]
    max_level = int(params[2])
    L = params[3]
    periodic = params[4] != 0.0
    unit = params[5]
    a = u / unit
    b = v / unit
    if periodic:
        xi = round(L / unit)  # knots per period; integer by construction
        a = a % xi
        b = b % xi
        lo = a if a <= b else b
        hi = b if a <= b else a
        return multiscale_core(lo, hi, order, smoothness, max_level) + (
            multiscale_core(hi, lo + xi, order, smoothness, max_level)
        )
    hi_knot = L / unit
    a = min(max(a, 0.0), hi_knot)
    b = min(max(b, 0.0), hi_knot)
    return multiscale_core(a, b, order, smoothness, max_level)


@jit
def phi_into(kind, params, centers, x, out):
    """Fill ``out[i] = kernel_value(kind, params, centers[i], x)``."""
    for i in range(centers.shape[0]):
        out[i] = kernel_value(kind, params, centers[i], x)


@jit
def cross_gram_into(kind, params, xs, ys, out):
    """Fill ``out[i, j] = kernel_value(kind, params, xs[i], ys[j])``."""
    for i in range(xs.shape[0]):
        for j in range(ys.shape[0]):
            out[i, j] = kernel_value(kind, params, xs[i], ys[j])


@jit
def gram_into(kind, params, centers, out):
    """Fill the symmetric Grammian ``out[i, j] = k(x_i, x_j)``."""
    n = centers.shape[0]
    for i in range(n):
        for j in range(i + 1):
            val = kernel_value(kind, params, centers[i], centers[j])
            out[i, j] = val
            out[j, i] = val
