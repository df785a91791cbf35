"""Compiled core of the coupled plant/estimator/learning-law integration.

The packed state vector is ``y = [x(0:d), x_hat(0:d), alpha_hat(0:n), s]``.
The right-hand side implements::

    x_dot      = A x + B f(s)
    x_hat_dot  = A x_hat + B (alpha_hat . phi(s))
    alpha_dot  = Ginv phi(s) * (B^T P (x - x_hat))
    s_dot      = path_speed

where ``phi`` is the vector of kernel sections evaluated at the path
coordinate and ``Ginv`` is the inverse of the learning-gain metric
(diagonal in euclidean mode, dense for the Grammian metric).  The loop
is classical fixed-step RK4 with sampling every ``sample_every`` steps
and a divergence guard (any |y_i| > 1e12, NaN included, aborts).

True-function kind codes: 0 = sine road, 1 = sampled road (periodic
linear interpolation), 2 = kernel expansion with its own kernel.
"""

import math

import numpy as np

from ._backend import jit
from ._kern import kernel_value, phi_into

TRUE_SINE = 0
TRUE_SAMPLED = 1
TRUE_EXPANSION = 2

DIVERGENCE_BOUND = 1e12


@jit
def road_value(kind, amplitude, frequency, L, knots_s, knots_z, s):
    """Road elevation at path coordinate ``s`` (wrapped into ``[0, L)``).

    ``kind`` 0: ``amplitude * sin(2 pi frequency s)`` on the wrapped
    coordinate.  ``kind`` 1: periodic linear interpolation between the
    sorted knots ``(knots_s, knots_z)``.
    """
    sm = s % L
    if kind == TRUE_SINE:
        return amplitude * math.sin(2.0 * math.pi * frequency * sm)
    n = knots_s.shape[0]
    if sm < knots_s[0] or sm >= knots_s[n - 1]:
        # wrap segment from the last knot around to the first
        s0 = knots_s[n - 1]
        s1 = knots_s[0] + L
        sq = sm + L if sm < knots_s[0] else sm
        span = s1 - s0
        t = (sq - s0) / span if span > 0.0 else 0.0
        return knots_z[n - 1] + t * (knots_z[0] - knots_z[n - 1])
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if knots_s[mid] <= sm:
            lo = mid
        else:
            hi = mid
    span = knots_s[lo + 1] - knots_s[lo]
    t = (sm - knots_s[lo]) / span if span > 0.0 else 0.0
    return knots_z[lo] + t * (knots_z[lo + 1] - knots_z[lo])


@jit
def true_value(
    true_kind,
    amplitude,
    frequency,
    L,
    knots_s,
    knots_z,
    tf_kind,
    tf_params,
    tf_centers,
    tf_coefs,
    s,
):
    """Unknown-function value at path coordinate ``s``."""
    if true_kind == TRUE_EXPANSION:
        acc = 0.0
        for i in range(tf_centers.shape[0]):
            acc += tf_coefs[i] * kernel_value(tf_kind, tf_params, tf_centers[i], s)
        return acc
    return road_value(true_kind, amplitude, frequency, L, knots_s, knots_z, s)


@jit
def coupled_rhs(
    y,
    out,
    phi,
    A,
    B,
    BP,
    d,
    kern_kind,
    kern_params,
    centers,
    ginv_diag,
    ginv_full,
    g_is_diag,
    true_kind,
    amplitude,
    frequency,
    L,
    knots_s,
    knots_z,
    tf_kind,
    tf_params,
    tf_centers,
    tf_coefs,
    path_speed,
):
    """Evaluate the coupled right-hand side at packed state ``y``."""
    n = centers.shape[0]
    s = y[2 * d + n]
    f_true = true_value(
        true_kind,
        amplitude,
        frequency,
        L,
        knots_s,
        knots_z,
        tf_kind,
        tf_params,
        tf_centers,
        tf_coefs,
        s,
    )
    phi_into(kern_kind, kern_params, centers, s, phi)
    f_hat = 0.0
    for i in range(n):
        f_hat += y[2 * d + i] * phi[i]
    for i in range(d):
        acc = 0.0
        acch = 0.0
        for j in range(d):
            acc += A[i, j] * y[j]
            acch += A[i, j] * y[d + j]
        out[i] = acc + B[i] * f_true
        out[d + i] = acch + B[i] * f_hat
    u = 0.0
    for i in range(d):
        u += BP[i] * (y[i] - y[d + i])
    if g_is_diag:
        for i in range(n):
            out[2 * d + i] = u * (ginv_diag[i] * phi[i])
    else:
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += ginv_full[i, j] * phi[j]
            out[2 * d + i] = u * acc
    out[2 * d + n] = path_speed


@jit
def simulate_loop(
    A,
    B,
    BP,
    d,
    n_steps,
    dt,
    sample_every,
    kern_kind,
    kern_params,
    centers,
    ginv_diag,
    ginv_full,
    g_is_diag,
    true_kind,
    amplitude,
    frequency,
    L,
    knots_s,
    knots_z,
    tf_kind,
    tf_params,
    tf_centers,
    tf_coefs,
    path_speed,
    y0,
    out_t,
    out_x,
    out_xh,
    out_ah,
    out_s,
):
    """Integrate the coupled system with RK4; fill the sample arrays.

    Returns ``(steps_completed, status)`` with status 0 on success and 1
    when the divergence guard fired (first offending step reported).
    """
    n = centers.shape[0]
    m = y0.shape[0]
    y = y0.copy()
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    k4 = np.empty(m)
    yt = np.empty(m)
    phi = np.empty(n)

    out_t[0] = 0.0
    for i in range(d):
        out_x[0, i] = y[i]
        out_xh[0, i] = y[d + i]
    for i in range(n):
        out_ah[0, i] = y[2 * d + i]
    out_s[0] = y[2 * d + n]

    row = 1
    for step in range(1, n_steps + 1):
        coupled_rhs(
            y, k1, phi, A, B, BP, d, kern_kind, kern_params, centers,
            ginv_diag, ginv_full, g_is_diag, true_kind, amplitude, frequency,
            L, knots_s, knots_z, tf_kind, tf_params, tf_centers, tf_coefs,
            path_speed,
        )
        for i in range(m):
            yt[i] = y[i] + 0.5 * dt * k1[i]
        coupled_rhs(
            yt, k2, phi, A, B, BP, d, kern_kind, kern_params, centers,
            ginv_diag, ginv_full, g_is_diag, true_kind, amplitude, frequency,
            L, knots_s, knots_z, tf_kind, tf_params, tf_centers, tf_coefs,
            path_speed,
        )
        for i in range(m):
            yt[i] = y[i] + 0.5 * dt * k2[i]
        coupled_rhs(
            yt, k3, phi, A, B, BP, d, kern_kind, kern_params, centers,
            ginv_diag, ginv_full, g_is_diag, true_kind, amplitude, frequency,
            L, knots_s, knots_z, tf_kind, tf_params, tf_centers, tf_coefs,
            path_speed,
        )
        for i in range(m):
            yt[i] = y[i] + dt * k3[i]
        coupled_rhs(
            yt, k4, phi, A, B, BP, d, kern_kind, kern_params, centers,
            ginv_diag, ginv_full, g_is_diag, true_kind, amplitude, frequency,
            L, knots_s, knots_z, tf_kind, tf_params, tf_centers, tf_coefs,
            path_speed,
        )
        for i in range(m):
            y[i] = y[i] + (dt / 6.0) * (
                k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]
            )

        biggest = 0.0
        for i in range(m):
            ai = abs(y[i])
            if ai > biggest:
                biggest = ai
        if not (biggest <= DIVERGENCE_BOUND):
            return step, 1

        if step % sample_every == 0:
            out_t[row] = step * dt
            for i in range(d):
                out_x[row, i] = y[i]
                out_xh[row, i] = y[d + i]
            for i in range(n):
                out_ah[row, i] = y[2 * d + i]
            out_s[row] = y[2 * d + n]
            row += 1
    return n_steps, 0
