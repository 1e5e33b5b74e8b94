"""Adaptive integration of comparison ODEs and finite-dimensional evolution systems.

The integrator is the Dormand-Prince 5(4) pair with a PI step controller and
its fourth-order continuous extension for dense output. Finite-time blow-up is
declared when the step controller collapses while the norm escapes; the
blow-up time is then extrapolated from 1/||u||^2 over the last accepted steps.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .certcore import InequalityProblem
from .errors import DimensionMismatch, HypothesisViolated, InvalidParameter, PastBlowup
from .functions import TimeFunction, fmt

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# fifth-order minus embedded fourth-order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# continuous extension: y(t + theta h) = y + h * K^T (P @ [theta, theta^2, theta^3, theta^4])
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])
ORDER = 5


class Status(str, enum.Enum):
    COMPLETED = "Completed"
    BLOWUP = "BlowUp"
    STEP_FAILURE = "StepFailure"


@dataclass(frozen=True)
class IntegratorOptions:
    rtol: float = 1e-10
    atol: float = 1e-12
    first_step: Optional[float] = None
    max_steps: int = 2_000_000
    floor_factor: float = 1e-12
    collapse_factor: float = 1e3
    escape_factor: float = 100.0
    safety: float = 0.9
    sample_times: Optional[tuple] = None

    def with_samples(self, times) -> "IntegratorOptions":
        return replace(self, sample_times=tuple(float(t) for t in times))


@dataclass(frozen=True)
class Trajectory:
    """Integrated solution. ``states`` has shape (len(times), dim)."""

    times: np.ndarray
    states: np.ndarray
    norms: np.ndarray
    status: Status
    tb_estimate: Optional[float] = None
    failure_time: Optional[float] = None
    reason: str = ""
    comparison: bool = False
    n_steps: int = 0
    n_rejected: int = 0
    n_evals: int = 0

    @property
    def bounded_values(self) -> np.ndarray:
        # a comparison trajectory already is g(t); report its sign as-is
        if self.comparison:
            return self.states[:, 0]
        return self.norms

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def status_line(self) -> str:
        if self.status is Status.BLOWUP:
            return f"# status: BlowUp tb_estimate={fmt(self.tb_estimate)}"
        if self.status is Status.STEP_FAILURE:
            return f"# status: StepFailure t={fmt(self.failure_time)} reason={self.reason}"
        return "# status: Completed"

    def csv_lines(self) -> list[str]:
        dim = self.states.shape[1]
        header = ",".join(["t"] + [f"u{i + 1}" for i in range(dim)] + ["norm"])
        lines = [header]
        for t, u, n in zip(self.times, self.states, self.norms):
            lines.append(",".join([fmt(t)] + [fmt(x) for x in u] + [fmt(n)]))
        lines.append(self.status_line())
        return lines

    def to_csv(self) -> str:
        return "\n".join(self.csv_lines()) + "\n"


def _rms(x):
    return math.sqrt(float(np.mean(x * x)))


def _extrapolate_blowup(ts: Sequence[float], norms: Sequence[float]) -> float:
    """Zero of the least-squares line through (t, 1/||u||^2)."""
    t = np.asarray(ts, dtype=float)
    y = 1.0 / np.asarray(norms, dtype=float) ** 2
    t_last = float(t[-1])
    if len(t) < 2:
        return t_last
    tc = t - t_last
    slope, intercept = np.polyfit(tc, y, 1)
    if not slope < 0:
        return t_last
    return t_last + max(0.0, -intercept / slope)


def integrate(
    rhs: Callable,
    y0,
    t0: float,
    horizon: float,
    opts: IntegratorOptions = IntegratorOptions(),
    comparison: bool = False,
) -> Trajectory:
    """Integrate y' = rhs(t, y) from t0 to t0 + horizon."""
    if not horizon > 0:
        raise InvalidParameter(f"horizon must be > 0, got {horizon}")
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    dim = y.size
    t_end = t0 + horizon
    floor = opts.floor_factor * horizon
    collapse = opts.collapse_factor * floor
    escape_level = opts.escape_factor * max(1.0, float(np.linalg.norm(y)))

    def f(t, x):
        out = np.atleast_1d(np.asarray(rhs(t, x), dtype=float))
        if out.shape != (dim,):
            raise DimensionMismatch(f"rhs returned shape {out.shape}, expected ({dim},)")
        return out

    samples = None if opts.sample_times is None else np.asarray(sorted(opts.sample_times), dtype=float)
    if samples is not None and (np.any(samples < t0) or np.any(samples > t_end)):
        raise InvalidParameter("sample times must lie within [t0, t0 + horizon]")
    out_t, out_y = [], []
    if samples is None:
        out_t.append(t0)
        out_y.append(y.copy())
        s_idx = 0
    else:
        s_idx = 0
        while s_idx < len(samples) and samples[s_idx] == t0:
            out_t.append(t0)
            out_y.append(y.copy())
            s_idx += 1

    fy = f(t0, y)
    n_evals = 1
    if opts.first_step is not None:
        h = opts.first_step
    else:
        scale = opts.atol + opts.rtol * np.abs(y)
        d0, d1 = _rms(y / scale), _rms(fy / scale)
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        y1 = y + h0 * fy
        f1 = f(t0 + h0, y1)
        n_evals += 1
        d2 = _rms((f1 - fy) / scale) / h0
        h1 = max(1e-6, h0 * 1e-3) if max(d1, d2) <= 1e-15 else (0.01 / max(d1, d2)) ** (1 / ORDER)
        h = min(100 * h0, h1)
    h = min(max(h, floor), horizon)

    t = t0
    err_prev = 1e-4
    hist_t, hist_n = [t0], [float(np.linalg.norm(y))]
    n_steps = n_rejected = 0
    status, tb, fail_t, reason = Status.COMPLETED, None, None, ""
    K = np.empty((7, dim))

    def escaping():
        if len(hist_n) < 4 or hist_n[-1] < escape_level:
            return False
        last = hist_n[-4:]
        return all(b > a for a, b in zip(last, last[1:]))

    while t < t_end:
        if n_steps + n_rejected >= opts.max_steps:
            status, fail_t, reason = Status.STEP_FAILURE, t, "max_steps exceeded"
            break
        if h < collapse and escaping():
            status, tb = Status.BLOWUP, _extrapolate_blowup(hist_t[-3:], hist_n[-3:])
            break
        if h < floor:
            status, fail_t, reason = Status.STEP_FAILURE, t, "step size below floor"
            break
        last_step = t + h >= t_end
        if last_step:
            h = t_end - t
        K[0] = fy
        for s in range(1, 7):
            K[s] = f(t + _C[s] * h, y + h * (np.dot(_A[s], K[:s])))
        n_evals += 6
        y_new = y + h * (_B @ K)
        f_new = K[6]
        if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(f_new))):
            if escaping():
                status, tb = Status.BLOWUP, _extrapolate_blowup(hist_t[-3:], hist_n[-3:])
                break
            h *= 0.2
            n_rejected += 1
            continue
        scale = opts.atol + opts.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(h * (_E @ K) / scale)
        if err <= 1.0:
            if samples is not None:
                while s_idx < len(samples) and samples[s_idx] <= t + h:
                    theta = (samples[s_idx] - t) / h
                    if last_step and samples[s_idx] == t_end:
                        out_y.append(y_new.copy())
                    else:
                        powers = np.array([theta, theta ** 2, theta ** 3, theta ** 4])
                        out_y.append(y + h * (K.T @ (_P @ powers)))
                    out_t.append(samples[s_idx])
                    s_idx += 1
            t = t_end if last_step else t + h
            y, fy = y_new, f_new
            n_steps += 1
            if samples is None:
                out_t.append(t)
                out_y.append(y.copy())
            hist_t.append(t)
            hist_n.append(float(np.linalg.norm(y)))
            fac = opts.safety * err ** (-0.7 / ORDER) * err_prev ** (0.4 / ORDER) if err > 0 else 5.0
            h *= min(5.0, max(0.2, fac))
            err_prev = max(err, 1e-4)
        else:
            n_rejected += 1
            h *= max(0.2, opts.safety * err ** (-1.0 / ORDER))

    if status is Status.STEP_FAILURE and fail_t is None:
        fail_t = t
    times = np.asarray(out_t, dtype=float)
    states = np.asarray(out_y, dtype=float).reshape(len(out_t), dim)
    norms = np.linalg.norm(states, axis=1)
    return Trajectory(times, states, norms, status, tb, fail_t, reason, comparison,
                      n_steps, n_rejected, n_evals)


# ---------------------------------------------------------------------------
# problems


@dataclass(frozen=True)
class ScalarIVP:
    f: Callable
    x0: float
    t0: float = 0.0
    horizon: float = 1.0


def integrate_scalar(ivp: ScalarIVP, opts: IntegratorOptions = IntegratorOptions()) -> Trajectory:
    return integrate(lambda t, x: ivp.f(t, x[0]), [ivp.x0], ivp.t0, ivp.horizon, opts, comparison=True)


def integrate_comparison(
    problem: InequalityProblem,
    phi0: Optional[float] = None,
    horizon: Optional[float] = None,
    opts: IntegratorOptions = IntegratorOptions(),
) -> Trajectory:
    """Solve the worst-case ODE phi' = -gamma phi + alpha(t, phi) + beta.

    phi is reported raw: when beta < 0 it may cross zero and keep going.
    """
    phi0 = problem.g0 if phi0 is None else phi0
    if not phi0 >= 0:
        raise InvalidParameter(f"phi0 must be >= 0, got {phi0}")
    horizon = problem.horizon if horizon is None else horizon
    return integrate(lambda t, x: problem.rhs(t, x), [phi0], 0.0, horizon, opts, comparison=True)


def _as_matrix_fn(A, dim):
    if callable(A):
        return A
    mat = np.asarray(A, dtype=float)
    return lambda t: mat


def _as_vector_fn(b, dim):
    if b is None:
        zero = np.zeros(dim)
        return lambda t: zero
    if callable(b):
        return b
    vec = np.asarray(b, dtype=float)
    return lambda t: vec


@dataclass
class EvolutionSystem:
    """u' = A(t) u + F(t, u) + b(t), u(0) = u0, on R^n.

    ``A`` and ``b`` may be constants or callables of t; ``F`` a callable of
    (t, u) or None.
    """

    A: object
    u0: Sequence[float]
    F: Optional[Callable] = None
    b: object = None
    gamma: Optional[TimeFunction] = None

    def __post_init__(self):
        self.u0 = np.atleast_1d(np.asarray(self.u0, dtype=float))
        self.dim = self.u0.size
        if self.dim < 1:
            raise DimensionMismatch("state dimension must be >= 1")
        self._A = _as_matrix_fn(self.A, self.dim)
        self._b = _as_vector_fn(self.b, self.dim)
        a0 = np.atleast_2d(np.asarray(self._A(0.0), dtype=float))
        if a0.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"A(0) has shape {a0.shape}, expected {(self.dim, self.dim)}")
        b0 = np.atleast_1d(np.asarray(self._b(0.0), dtype=float))
        if b0.shape != (self.dim,):
            raise DimensionMismatch(f"b(0) has shape {b0.shape}, expected ({self.dim},)")

    def matrix(self, t):
        return np.atleast_2d(np.asarray(self._A(t), dtype=float))

    def rhs(self, t, u):
        out = self.matrix(t) @ u + np.atleast_1d(np.asarray(self._b(t), dtype=float))
        if self.F is not None:
            out = out + np.atleast_1d(np.asarray(self.F(t, u), dtype=float))
        return out

    def dissipativity_excess(self, horizon: float, n: int = 1000, seed: int = 0) -> float:
        """max over random (t, unit u) of <A(t)u, u> + gamma(t); <= 0 when <A(t)u, u> <= -gamma(t)|u|^2."""
        if self.gamma is None:
            raise InvalidParameter("system declares no dissipativity rate")
        rng = np.random.default_rng(seed)
        ts = rng.uniform(0.0, horizon, n)
        us = rng.standard_normal((n, self.dim))
        us /= np.linalg.norm(us, axis=1, keepdims=True)
        worst = -np.inf
        for t, u in zip(ts, us):
            worst = max(worst, float(u @ self.matrix(t) @ u) + float(self.gamma(t)))
        return worst


def integrate_system(system: EvolutionSystem, horizon: float,
                     opts: IntegratorOptions = IntegratorOptions()) -> Trajectory:
    return integrate(system.rhs, system.u0, 0.0, horizon, opts)


def norm_right_derivative(u, du) -> float:
    """Right derivative of ||u(t)|| given u(t) and u'(t).

    Equals <u', u>/||u|| where u != 0 and ||u'|| where u = 0; the two-sided
    derivative does not exist at zeros of u.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    du = np.atleast_1d(np.asarray(du, dtype=float))
    n = float(np.linalg.norm(u))
    if n == 0.0:
        return float(np.linalg.norm(du))
    return float(du @ u) / n


# ---------------------------------------------------------------------------
# closed-form oracles


def cubic_blowup_time(c: float, u0: float) -> float:
    """Escape time 1/(2 c u0^2) of u' = c u^3 (infinite when c <= 0)."""
    if u0 == 0:
        raise InvalidParameter("u0 must be nonzero")
    if c <= 0:
        return math.inf
    return 1.0 / (2.0 * c * u0 * u0)


def blowup_oracle_cubic(c: float, u0: float, t: float) -> float:
    """Closed-form solution (u0^-2 - 2ct)^(-1/2) of u' = c u^3, signed like u0."""
    tb = cubic_blowup_time(c, u0)
    if t >= tb:
        raise PastBlowup(f"t={t} is at or past the blow-up time {tb}")
    return math.copysign((u0 ** -2 - 2.0 * c * t) ** -0.5, u0)


def quadratic_blowup_time(g0: float, c: float) -> float:
    if not (g0 > 0 and c > 0):
        raise InvalidParameter("need g0 > 0 and c > 0")
    return 1.0 / (c * g0)


def blowup_oracle_quadratic_lower(g0: float, c: float, t: float) -> float:
    """Lower envelope (1/g0 - c t)^(-1) for solutions of g' >= c g^2."""
    tb = quadratic_blowup_time(g0, c)
    if t >= tb:
        raise PastBlowup(f"t={t} is at or past the blow-up time {tb}")
    return 1.0 / (1.0 / g0 - c * t)


def peano_interval(T: float, b: float, M: float) -> float:
    """Guaranteed local existence length min(T, b/M)."""
    if not (T > 0 and b > 0 and M > 0):
        raise InvalidParameter("peano_interval needs T, b, M > 0")
    return min(T, b / M)


def lipschitz_interval(R: float, M: float, L: float) -> float:
    """Local existence-and-uniqueness length min(R/M, L)."""
    if not (R > 0 and M > 0 and L > 0):
        raise InvalidParameter("lipschitz_interval needs R, M, L > 0")
    return min(R / M, L)


# ---------------------------------------------------------------------------
# comparison


@dataclass(frozen=True)
class ComparisonVerdict:
    holds: bool
    max_gap_violation: float
    tol: float
    trajectory: Trajectory = field(repr=False)
    hypothesis_excess: float = 0.0


def _grid_eval(func, T, X):
    try:
        out = np.asarray(func(T, X), dtype=float)
        if out.shape == T.shape:
            return out
    except Exception:
        pass
    return np.vectorize(lambda a, b: float(func(a, b)))(T, X)


def check_comparison(
    f: Callable,
    g: Callable,
    phi0: float,
    psi0: float,
    horizon: float,
    t0: float = 0.0,
    opts: IntegratorOptions = IntegratorOptions(rtol=1e-9, atol=1e-12),
    tol: Optional[float] = None,
    n_grid: int = 101,
) -> ComparisonVerdict:
    """Integrate phi' = f, psi' = g on a shared adaptive time base and test phi <= psi.

    The hypothesis f <= g is sampled on an n_grid x n_grid grid over the
    tube swept by both solutions; a sampled violation raises
    HypothesisViolated. This is a filter, not a proof.
    """
    if psi0 < phi0:
        raise HypothesisViolated(f"psi0={psi0} < phi0={phi0}")
    traj = integrate(lambda t, x: np.array([f(t, x[0]), g(t, x[1])]),
                     [phi0, psi0], t0, horizon, opts, comparison=True)
    lo = float(np.min(traj.states))
    hi = float(np.max(traj.states))
    margin = 0.1 * (hi - lo) + 1e-3
    T, X = np.meshgrid(np.linspace(t0, float(traj.times[-1]), n_grid),
                       np.linspace(lo - margin, hi + margin, n_grid), indexing="ij")
    diff = _grid_eval(f, T, X) - _grid_eval(g, T, X)
    excess = float(np.max(diff))
    if excess > 0:
        i = np.unravel_index(int(np.argmax(diff)), diff.shape)
        raise HypothesisViolated(
            f"f > g at t={T[i]:.6g}, x={X[i]:.6g} by {excess:.3g}", float(T[i]), float(X[i]), excess
        )
    gap = traj.states[:, 0] - traj.states[:, 1]
    if tol is None:
        tol = 10.0 * (opts.atol + opts.rtol * float(np.max(np.abs(traj.states))))
    worst = float(np.max(gap))
    return ComparisonVerdict(worst <= tol, worst, tol, traj, excess)
