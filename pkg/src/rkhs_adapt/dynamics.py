"""Coupled plant / estimator / learning-law dynamics.

The true plant ``x_dot = A x + B f(s(t))`` is driven by an unknown scalar
function of a path coordinate ``s`` advancing at constant speed.  The
estimator mirrors the plant with the current function estimate
``f_hat = alpha_hat . phi`` (``phi`` the vector of kernel sections at the
active centers) and the gradient learning law updates the coefficients
from the state error::

    alpha_hat_dot = G^-1 phi(s) B^T P (x - x_hat)

with ``P`` the Lyapunov solution of ``A^T P + P A = -Q`` and ``G`` the
learning metric: ``G = gain`` (euclidean mode, the plain coordinate
gradient) or ``G = gain * K`` with ``K`` the Grammian (rkhs_metric mode,
the same gradient measured in the function-space inner product).

Along exact trajectories with the true function in the span of the
active sections, ``V = (x-x_hat)' P (x-x_hat)/2 + a' G a / 2`` (``a`` the
coefficient error) is nonincreasing with ``V_dot = -(x-x_hat)' Q
(x-x_hat)/2``; :func:`lyapunov_trace_check` verifies that identity on a
recorded run by finite differences.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _sim
from .errors import (
    IllConditioned,
    NonFiniteDerivative,
    NotApplicable,
    NotPositiveDefinite,
    UnstableIntegration,
    WindowOutOfRange,
)
from .kernels import check_distinct_centers, cross_grammian, grammian
from .linops import assert_hurwitz, condition_number_2, solve_lyapunov
from .rkhs import RkhsExpansion

__all__ = [
    "EstimatorRun",
    "EstimatorState",
    "LearningLaw",
    "LtiPlant",
    "LyapunovReport",
    "lyapunov_trace_check",
    "pe_lower_bound",
    "pe_matrix",
    "simulate",
    "step_rk4",
]

STABILITY_GUARD = 0.1  # require dt * spectral_radius(A) below this


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LtiPlant:
    """Linear time-invariant plant ``x_dot = A x + B f`` with Hurwitz ``A``
    and a scalar unknown-input channel ``B``."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = _readonly(self.A)
        B = _readonly(np.atleast_1d(self.B)).ravel()
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if B.shape != (A.shape[0],):
            raise ValueError(
                f"B must be a {A.shape[0]}-vector, got shape {B.shape}"
            )
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise ValueError("A and B must be finite")
        assert_hurwitz(A)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", _readonly(B))

    @property
    def d(self):
        return self.A.shape[0]

    def spectral_radius(self):
        return float(np.abs(np.linalg.eigvals(self.A)).max())


@dataclass(frozen=True)
class LearningLaw:
    """Learning-law configuration: mode, gain, and Lyapunov pair (P, Q).

    ``gain`` is a positive scalar or a positive 1-D diagonal;
    ``rkhs_metric`` mode requires a scalar gain (the metric ``gain * K``
    must stay symmetric).  ``P`` must solve ``A^T P + P A = -Q`` for the
    plant it is used with; :func:`simulate` re-verifies the residual.
    """

    mode: str
    gain: object
    P: np.ndarray
    Q: np.ndarray
    ridge: float = 0.0

    def __post_init__(self):
        if self.mode not in ("euclidean", "rkhs_metric"):
            raise ValueError(
                f"mode must be 'euclidean' or 'rkhs_metric', got {self.mode!r}"
            )
        gain = self.gain
        if np.ndim(gain) == 0:
            gain = float(gain)
            if not (math.isfinite(gain) and gain > 0.0):
                raise ValueError(f"gain must be > 0, got {gain}")
        else:
            gain = _readonly(np.atleast_1d(gain))
            if gain.ndim != 1 or not np.all(np.isfinite(gain)) or np.any(
                gain <= 0.0
            ):
                raise ValueError("diagonal gain must be a positive 1-D array")
            if self.mode == "rkhs_metric":
                raise ValueError(
                    "rkhs_metric mode requires a scalar gain so the metric "
                    "gain * K stays symmetric"
                )
        object.__setattr__(self, "gain", gain)
        P = _readonly(self.P)
        Q = _readonly(self.Q)
        for name, M in (("P", P), ("Q", Q)):
            if M.ndim != 2 or M.shape[0] != M.shape[1]:
                raise ValueError(f"{name} must be square")
            if not np.all(np.isfinite(M)):
                raise ValueError(f"{name} must be finite")
            if np.linalg.norm(M - M.T) > 1e-10 * max(np.linalg.norm(M), 1e-300):
                raise ValueError(f"{name} must be symmetric")
        if P.shape != Q.shape:
            raise ValueError("P and Q must have matching shapes")
        if np.linalg.eigvalsh(P)[0] <= 0.0:
            raise ValueError("P must be positive definite")
        if not (math.isfinite(self.ridge) and self.ridge >= 0.0):
            raise ValueError(f"ridge must be >= 0, got {self.ridge}")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)

    @classmethod
    def for_plant(cls, plant, gain, mode="euclidean", Q=None, ridge=0.0):
        """Build a law for ``plant`` with ``P`` solved from ``Q``
        (identity by default)."""
        if Q is None:
            Q = np.eye(plant.d)
        P = solve_lyapunov(plant.A, Q)
        return cls(mode=mode, gain=gain, P=P, Q=np.asarray(Q, dtype=float),
                   ridge=ridge)


@dataclass(frozen=True)
class EstimatorState:
    """Instantaneous state of the coupled system."""

    t: float
    x: np.ndarray
    x_hat: np.ndarray
    alpha_hat: np.ndarray
    s: float

    def __post_init__(self):
        x = _readonly(self.x)
        x_hat = _readonly(self.x_hat)
        alpha_hat = _readonly(self.alpha_hat)
        if not (
            math.isfinite(self.t)
            and math.isfinite(self.s)
            and np.all(np.isfinite(x))
            and np.all(np.isfinite(x_hat))
            and np.all(np.isfinite(alpha_hat))
        ):
            raise ValueError("state entries must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "x_hat", x_hat)
        object.__setattr__(self, "alpha_hat", alpha_hat)


@dataclass(frozen=True)
class EstimatorRun:
    """Sampled trajectory of one integration, plus diagnostics.

    ``V`` holds the full Lyapunov function when the true function was an
    expansion on the active centers (``v_exact`` True); otherwise only
    its state-error part ``(x - x_hat)' P (x - x_hat) / 2``.
    """

    t: np.ndarray
    x: np.ndarray
    x_hat: np.ndarray
    alpha_hat: np.ndarray
    s: np.ndarray
    V: np.ndarray
    x_err_norm: np.ndarray
    v_exact: bool
    alpha_star: np.ndarray | None
    plant: LtiPlant
    law: LearningLaw
    kernel: object
    centers: np.ndarray
    true_f: object
    path_speed: float
    dt: float
    sample_every: int
    config_echo: dict = field(default_factory=dict)

    @property
    def final_expansion(self):
        """The learned function estimate at the final sample."""
        return RkhsExpansion(self.kernel, self.centers, self.alpha_hat[-1])

    def state_at(self, index):
        return EstimatorState(
            t=float(self.t[index]),
            x=self.x[index],
            x_hat=self.x_hat[index],
            alpha_hat=self.alpha_hat[index],
            s=float(self.s[index]),
        )


def step_rk4(system_rhs, state, dt):
    """One classical 4th-order Runge-Kutta step.

    ``state`` is a ``(t, y)`` pair with ``y`` a scalar or 1-D array;
    ``system_rhs(t, y)`` returns ``dy/dt``.  Returns ``(t + dt, y_next)``.

    Raises
    ------
    NonFiniteDerivative
        If any stage derivative is NaN or infinite.
    """
    if not (math.isfinite(dt) and dt > 0.0):
        raise ValueError(f"dt must be > 0, got {dt}")
    t, y = state
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0

    def rhs(tt, yy):
        k = np.asarray(system_rhs(tt, yy), dtype=float)
        if not np.all(np.isfinite(k)):
            raise NonFiniteDerivative(f"non-finite derivative at t={tt!r}")
        return k

    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    y_next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return (t + dt, float(y_next) if scalar else y_next)


def _learning_metric(law, kernel, centers):
    """Resolve the learning metric for ``n`` coefficients.

    Returns ``(ginv_diag, ginv_full, g_is_diag, quad)`` where ``quad``
    evaluates ``a' G a / 2`` rowwise on an ``(m, n)`` array of
    coefficient errors.
    """
    n = centers.size
    if law.mode == "euclidean":
        if np.ndim(law.gain) == 0:
            diag = np.full(n, float(law.gain))
        else:
            if law.gain.size != n:
                raise ValueError(
                    f"diagonal gain has {law.gain.size} entries for "
                    f"{n} centers"
                )
            diag = law.gain.astype(float)
        ginv_diag = 1.0 / diag

        def quad(a_rows):
            return 0.5 * (a_rows * a_rows * diag).sum(axis=1)

        return ginv_diag, np.empty((0, 0)), True, quad

    # rkhs_metric: G = gain * (K + ridge I)
    K = grammian(kernel, centers)
    if law.ridge > 0.0:
        K = K + law.ridge * np.eye(n)
    cond = condition_number_2(K)
    if cond > 1e14:
        warnings.warn(
            f"Grammian condition number {cond:.3e} exceeds 1e14; "
            "rkhs_metric learning may be inaccurate",
            IllConditioned,
            stacklevel=3,
        )
    G = float(law.gain) * K
    try:
        np.linalg.cholesky((G + G.T) / 2.0)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(
            "learning metric gain * K is not positive definite; "
            "consider a ridge"
        ) from None
    ginv_full = np.linalg.solve(G, np.eye(n))

    def quad(a_rows):
        return 0.5 * np.einsum("mi,ij,mj->m", a_rows, G, a_rows)

    return np.empty(0), ginv_full, False, quad


_EMPTY = np.empty(0)


def _true_function_args(true_f, kernel, centers):
    """Map the true function onto the compiled loop's argument set."""
    if isinstance(true_f, RkhsExpansion):
        alpha_star = None
        if true_f.kernel.same_as(kernel) and np.array_equal(
            true_f.centers, centers
        ):
            alpha_star = np.asarray(true_f.coefficients, dtype=float)
        return (
            _sim.TRUE_EXPANSION,
            0.0,
            0.0,
            true_f.kernel.domain.length,
            _EMPTY,
            _EMPTY,
            true_f.kernel.kind_code,
            np.asarray(true_f.kernel.params, dtype=float),
            np.asarray(true_f.centers, dtype=float),
            np.asarray(true_f.coefficients, dtype=float),
            alpha_star,
        )
    code = getattr(true_f, "true_kind_code", None)
    if code is None:
        raise TypeError(
            "true_f must be an RkhsExpansion or a road profile, got "
            f"{type(true_f).__name__}"
        )
    ks = true_f.knots_s if true_f.knots_s is not None else _EMPTY
    kz = true_f.knots_z if true_f.knots_z is not None else _EMPTY
    return (
        code(),
        float(true_f.amplitude),
        float(true_f.frequency),
        float(true_f.domain.length),
        np.asarray(ks, dtype=float),
        np.asarray(kz, dtype=float),
        0,
        np.zeros(3),
        _EMPTY,
        _EMPTY,
        None,
    )


def simulate(
    plant,
    true_f,
    law,
    centers,
    kernel,
    path_speed,
    t_final,
    dt,
    sample_every=1,
    *,
    s0=0.0,
    x0=None,
    x_hat0=None,
    alpha_hat0=None,
    config_echo=None,
):
    """Integrate the coupled plant/estimator/learning system.

    Parameters
    ----------
    plant : LtiPlant
    true_f : RkhsExpansion or RoadProfile
        The unknown function driving the plant.  When it is an expansion
        on exactly the active centers and kernel, the true coefficients
        are known and the recorded ``V`` is the full Lyapunov function.
    law : LearningLaw
    centers : (n,) array_like
        Active expansion centers (pairwise distinct).
    kernel : GaussianKernel or MultiscaleKernel
    path_speed : float
        Constant rate of the path coordinate ``s``.
    t_final, dt : float
        Horizon and fixed step; ``t_final`` must be an integer number of
        steps and ``dt * spectral_radius(A) < 0.1``.
    sample_every : int
        Record every this many steps (must divide the step count).

    Returns
    -------
    EstimatorRun

    Raises
    ------
    NonFiniteDerivative
        If the right-hand side is non-finite at the initial state.
    UnstableIntegration
        If any packed-state entry exceeds 1e12 in magnitude.
    """
    if not (math.isfinite(t_final) and t_final > 0.0):
        raise ValueError(f"t_final must be > 0, got {t_final}")
    if not (math.isfinite(dt) and dt > 0.0):
        raise ValueError(f"dt must be > 0, got {dt}")
    n_steps = int(round(t_final / dt))
    if n_steps < 1 or abs(n_steps * dt - t_final) > 1e-9 * max(t_final, 1.0):
        raise ValueError(
            f"t_final={t_final!r} is not an integer number of dt={dt!r} steps"
        )
    sample_every = int(sample_every)
    if sample_every < 1:
        raise ValueError(f"sample_every must be >= 1, got {sample_every}")
    if n_steps % sample_every != 0:
        raise ValueError(
            f"sample_every={sample_every} must divide the "
            f"{n_steps} integration steps"
        )
    if not (math.isfinite(path_speed) and path_speed >= 0.0):
        raise ValueError(f"path_speed must be >= 0, got {path_speed}")

    rho = plant.spectral_radius()
    if dt * rho >= STABILITY_GUARD:
        raise ValueError(
            f"dt={dt:g} too large for plant dynamics: dt * spectral_radius "
            f"= {dt * rho:.3g} >= {STABILITY_GUARD}"
        )

    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    if centers.size < 1:
        raise ValueError("need at least one center")
    check_distinct_centers(kernel, centers)
    n = centers.size
    d = plant.d

    residual = np.linalg.norm(plant.A.T @ law.P + law.P @ plant.A + law.Q)
    if residual > 1e-8 * max(np.linalg.norm(law.Q), 1e-300):
        raise ValueError(
            "law.P does not solve the Lyapunov equation for this plant "
            f"(residual {residual:.3e})"
        )

    ginv_diag, ginv_full, g_is_diag, quad = _learning_metric(
        law, kernel, centers
    )
    (
        true_kind,
        amplitude,
        frequency,
        road_L,
        knots_s,
        knots_z,
        tf_kind,
        tf_params,
        tf_centers,
        tf_coefs,
        alpha_star,
    ) = _true_function_args(true_f, kernel, centers)

    def _init(arg, size, name):
        if arg is None:
            return np.zeros(size)
        arr = np.asarray(arg, dtype=float).ravel()
        if arr.shape != (size,):
            raise ValueError(f"{name} must have shape ({size},)")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{name} must be finite")
        return arr

    y0 = np.concatenate(
        [
            _init(x0, d, "x0"),
            _init(x_hat0, d, "x_hat0"),
            _init(alpha_hat0, n, "alpha_hat0"),
            [float(s0)],
        ]
    )

    BP = plant.B @ law.P

    probe = np.empty(y0.size)
    _sim.coupled_rhs(
        y0, probe, np.empty(n), plant.A, plant.B, BP, d,
        kernel.kind_code, kernel.params, centers,
        ginv_diag, ginv_full, g_is_diag,
        true_kind, amplitude, frequency, road_L, knots_s, knots_z,
        tf_kind, tf_params, tf_centers, tf_coefs, float(path_speed),
    )
    if not np.all(np.isfinite(probe)):
        raise NonFiniteDerivative(
            "right-hand side is non-finite at the initial state"
        )

    m = n_steps // sample_every + 1
    out_t = np.empty(m)
    out_x = np.empty((m, d))
    out_xh = np.empty((m, d))
    out_ah = np.empty((m, n))
    out_s = np.empty(m)

    steps_done, status = _sim.simulate_loop(
        plant.A, plant.B, BP, d, n_steps, float(dt), sample_every,
        kernel.kind_code, kernel.params, centers,
        ginv_diag, ginv_full, g_is_diag,
        true_kind, amplitude, frequency, road_L, knots_s, knots_z,
        tf_kind, tf_params, tf_centers, tf_coefs,
        float(path_speed), y0,
        out_t, out_x, out_xh, out_ah, out_s,
    )
    if status != 0:
        raise UnstableIntegration(
            f"state diverged (entry beyond {_sim.DIVERGENCE_BOUND:g} or "
            f"non-finite) at t = {steps_done * dt:.6g}"
        )

    x_tilde = out_x - out_xh
    V = 0.5 * np.einsum("mi,ij,mj->m", x_tilde, law.P, x_tilde)
    v_exact = alpha_star is not None
    if v_exact:
        a_err = out_ah - alpha_star
        V = V + quad(a_err)
    x_err_norm = np.linalg.norm(x_tilde, axis=1)

    return EstimatorRun(
        t=_readonly(out_t),
        x=_readonly(out_x),
        x_hat=_readonly(out_xh),
        alpha_hat=_readonly(out_ah),
        s=_readonly(out_s),
        V=_readonly(V),
        x_err_norm=_readonly(x_err_norm),
        v_exact=v_exact,
        alpha_star=None if alpha_star is None else _readonly(alpha_star),
        plant=plant,
        law=law,
        kernel=kernel,
        centers=_readonly(centers),
        true_f=true_f,
        path_speed=float(path_speed),
        dt=float(dt),
        sample_every=sample_every,
        config_echo=dict(config_echo or {}),
    )


@dataclass(frozen=True)
class LyapunovReport:
    """Finite-difference verification of the Lyapunov decay identity."""

    max_defect: float
    tol: float
    passed: bool
    sample_spacing: float
    interior_samples: int


def lyapunov_trace_check(run, tol=1e-4):
    """Verify ``dV/dt = -(x - x_hat)' Q (x - x_hat) / 2`` on a run.

    ``dV/dt`` is estimated with 4th-order central differences on the
    recorded samples; the defect at each interior sample is normalized
    by ``1 + |dV/dt|`` and the report carries the maximum.

    Raises
    ------
    NotApplicable
        If the run recorded only the partial (state-error) ``V``.
    """
    if not run.v_exact:
        raise NotApplicable(
            "run recorded only the state-error part of V (true function "
            "was not an expansion on the active centers)"
        )
    t = run.t
    if t.size < 5:
        raise ValueError("need at least 5 samples for the interior stencil")
    h = float(t[1] - t[0])
    V = run.V
    x_tilde = run.x - run.x_hat
    qform = 0.5 * np.einsum("mi,ij,mj->m", x_tilde, run.law.Q, x_tilde)
    # 4th-order central difference on the uniform sample grid.
    dV = (V[:-4] - 8.0 * V[1:-3] + 8.0 * V[3:-1] - V[4:]) / (12.0 * h)
    defect = np.abs(dV + qform[2:-2]) / (1.0 + np.abs(dV))
    max_defect = float(defect.max())
    return LyapunovReport(
        max_defect=max_defect,
        tol=float(tol),
        passed=max_defect <= tol,
        sample_spacing=h,
        interior_samples=int(defect.size),
    )


def pe_matrix(run, t0, delta, kernel, centers):
    """Excitation matrix ``M = integral of phi(s) phi(s)' dt`` over
    ``[t0, t0 + delta]``, by the trapezoid rule on the recorded samples.

    Positive semidefinite by construction.  The quadratic form ``a' M a``
    is the time-integrated squared point evaluation of ``f = sum a_i
    k(x_i, .)`` along the path.

    Raises
    ------
    WindowOutOfRange
        If the window is not covered by the run or contains fewer than
        50 samples.
    """
    if not (math.isfinite(delta) and delta > 0.0):
        raise ValueError(f"delta must be > 0, got {delta}")
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    t = run.t
    tiny = 1e-9 * max(1.0, float(t[-1]))
    if t0 < t[0] - tiny or t0 + delta > t[-1] + tiny:
        raise WindowOutOfRange(
            f"window [{t0:g}, {t0 + delta:g}] not covered by run "
            f"[{t[0]:g}, {t[-1]:g}]"
        )
    mask = (t >= t0 - tiny) & (t <= t0 + delta + tiny)
    count = int(mask.sum())
    if count < 50:
        raise WindowOutOfRange(
            f"window holds {count} samples; need at least 50 — increase "
            "delta or sample more densely"
        )
    ts = t[mask]
    ss = run.s[mask]
    Phi = cross_grammian(kernel, ss, centers)
    w = np.empty(count)
    w[0] = 0.5 * (ts[1] - ts[0])
    w[-1] = 0.5 * (ts[-1] - ts[-2])
    if count > 2:
        w[1:-1] = 0.5 * (ts[2:] - ts[:-2])
    M = Phi.T @ (w[:, None] * Phi)
    return (M + M.T) / 2.0


def pe_lower_bound(M, K):
    """Smallest generalized eigenvalue of ``(M, K)``.

    This is the largest ``gamma`` with ``a' M a >= gamma * a' K a`` for
    all coefficient vectors — the excitation level per unit of squared
    function norm over the span of the sections.  Computed by reducing
    with the Cholesky factor of ``K``.
    """
    M = np.asarray(M, dtype=float)
    K = np.asarray(K, dtype=float)
    if M.shape != K.shape or M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("M and K must be square with matching shapes")
    cond = condition_number_2(K)
    if cond > 1e14:
        warnings.warn(
            f"Grammian condition number {cond:.3e} exceeds 1e14; the "
            "excitation bound may be inaccurate",
            IllConditioned,
            stacklevel=2,
        )
    try:
        C = np.linalg.cholesky((K + K.T) / 2.0)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("K is not positive definite") from None
    Z = np.linalg.solve(C, M)
    S = np.linalg.solve(C, Z.T)
    S = (S + S.T) / 2.0
    return float(np.linalg.eigvalsh(S)[0])
