"""Certificate verification for the scalar differential inequality

    g'(t) <= -gamma(t) g(t) + alpha(t, g(t)) + beta(t),   g(0) = g0,

against a majorant mu(t) > 0. A certificate holds when

    slack(t) = (1/mu)(gamma - mu'/mu) - alpha(t, 1/mu) - beta(t) >= 0

for all t and mu(0) g0 <= 1; then 0 <= g(t) <= 1/mu(t) wherever g exists,
and g exists for all t >= 0.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import EmptyTrajectory, InvalidParameter, NonPositiveMajorant
from .functions import (
    Constant,
    Exponential,
    ExponentialMajorant,
    Majorant,
    Nonlinearity,
    PowerDecay,
    PowerLaw,
    PowerMajorant,
    ShiftedInversePowerMajorant,
    TimeFunction,
    TimeScaledPower,
    ZeroNonlinearity,
    fmt,
)

MARGINAL_SLACK = 1e-9


class Verdict(str, enum.Enum):
    CERTIFIED_BOUNDED = "CertifiedBounded"
    CERTIFIED_DECAYING = "CertifiedDecaying"
    NOT_CERTIFIED = "NotCertified"


@dataclass(frozen=True)
class InequalityProblem:
    gamma: TimeFunction
    alpha: Nonlinearity
    beta: TimeFunction
    g0: float
    horizon: float

    def __post_init__(self):
        if not self.g0 >= 0:
            raise InvalidParameter(f"g0 must be >= 0, got {self.g0}")
        if not self.horizon > 0:
            raise InvalidParameter(f"horizon must be > 0, got {self.horizon}")

    def rhs(self, t, g):
        """Right-hand side of the worst-case (equality) ODE."""
        return -self.gamma(t) * g + self.alpha(t, g) + self.beta(t)


@dataclass(frozen=True)
class GridSpec:
    """Sample points on [0, horizon]: uniform, or log-spaced in (1 + t)."""

    n_points: int = 2001
    spacing: str = "uniform"

    def points(self, horizon: float) -> np.ndarray:
        if self.n_points < 2:
            raise InvalidParameter("grid needs at least 2 points")
        if self.spacing == "uniform":
            return np.linspace(0.0, horizon, self.n_points)
        if self.spacing == "log":
            t = np.expm1(np.linspace(0.0, np.log1p(horizon), self.n_points))
            t[0], t[-1] = 0.0, horizon
            return t
        raise InvalidParameter(f"unknown grid spacing {self.spacing!r}")


@dataclass(frozen=True)
class AnalyticReduction:
    """Outcome of reducing the all-t slack condition to a check at t = 0."""

    holds: bool
    condition: str
    residual: float


@dataclass(frozen=True)
class CertificateReport:
    verified: bool
    initial_ok: bool
    strict_initial: bool
    slack: np.ndarray
    min_slack: float
    argmin_time: float
    grid: np.ndarray
    mu_values: np.ndarray
    bound: Majorant
    asymptotic_decay: bool
    verdict: Verdict
    tolerance: float
    marginal: bool
    analytic: Optional[AnalyticReduction] = None
    stability: str = ""

    @property
    def method(self) -> str:
        if self.analytic is not None and self.analytic.holds:
            return "grid-verified+analytically-reduced"
        return "grid-verified"

    def bound_formula(self) -> str:
        return self.bound.bound_formula()

    def summary(self) -> dict:
        out = {
            "verified": self.verified,
            "verdict": self.verdict.value,
            "bound": self.bound_formula(),
            "majorant_family": self.bound.family,
            "mu": self.bound.formula(),
            "initial_ok": self.initial_ok,
            "strict_initial": self.strict_initial,
            "min_slack": self.min_slack,
            "argmin_time": self.argmin_time,
            "marginal": self.marginal,
            "tolerance": self.tolerance,
            "grid_points": len(self.grid),
            "horizon": float(self.grid[-1]),
            "asymptotic_decay": self.asymptotic_decay,
            "method": self.method,
            "stability": self.stability,
        }
        if self.analytic is not None:
            out["analytic_condition"] = self.analytic.condition
            out["analytic_holds"] = self.analytic.holds
            out["analytic_residual"] = self.analytic.residual
        return out

    def slack_rows(self):
        inv = 1.0 / self.mu_values
        return zip(self.grid, self.mu_values, inv, self.slack)


def slack_profile(problem: InequalityProblem, mu: Majorant, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (mu(t), slack(t)) on the sample points t."""
    mu_t = np.asarray(mu.value(t), dtype=float)
    bad = ~(mu_t > 0)
    if np.any(bad):
        where = float(np.asarray(t)[np.argmax(bad)])
        raise NonPositiveMajorant(f"mu(t) <= 0 at t={where}")
    inv = 1.0 / mu_t
    slack = inv * (np.asarray(problem.gamma(t)) - np.asarray(mu.log_rate(t))) \
        - np.asarray(problem.alpha(t, inv)) - np.asarray(problem.beta(t))
    return mu_t, np.asarray(slack, dtype=float)


def _power_coefficient(alpha):
    """(c, m, p) with alpha(t, g) = c (1+t)^(-m) g^p, or None."""
    if isinstance(alpha, PowerLaw):
        return alpha.c0, 0.0, alpha.p
    if isinstance(alpha, TimeScaledPower):
        return alpha.c2, alpha.m2, alpha.p
    return None


def analytic_reduction(problem: InequalityProblem, mu: Majorant) -> Optional[AnalyticReduction]:
    """Reduce slack(t) >= 0 for all t >= 0 to one inequality at t = 0.

    Applies when mu(t) * slack(t) is provably nondecreasing (exponential and
    power majorants) or bounded below by its worst case (shifted inverse
    power), given gamma, alpha, beta in the parametric kinds. Returns None
    when no reduction is known for the combination.
    """
    gamma, beta = problem.gamma, problem.beta
    zero_alpha = isinstance(problem.alpha, ZeroNonlinearity)
    power = None if zero_alpha else _power_coefficient(problem.alpha)
    if power is None and not zero_alpha:
        return None
    c, m, p = power if power is not None else (0.0, 0.0, 2.0)

    if isinstance(mu, ExponentialMajorant) and mu.b >= 0:
        # mu*slack = k - b - c(1+t)^-m mu^(1-p) - mu*beta, each term nondecreasing
        if not isinstance(gamma, Constant) or m < 0:
            return None
        if beta.is_zero():
            beta0 = 0.0
        elif isinstance(beta, Exponential) and beta.c >= 0 and beta.k >= mu.b:
            beta0 = beta.c
        else:
            return None
        residual = gamma.c - mu.b - c * mu.lam ** (1 - p) - mu.lam * beta0
        return AnalyticReduction(residual >= 0, "k - b - c0*lambda^(1-p) - lambda*beta(0) >= 0", residual)

    if isinstance(mu, PowerMajorant) and mu.nu >= 0:
        # multiply mu*slack by (1+t)^q1: every remaining power of (1+t) must be <= 0
        if isinstance(gamma, PowerDecay) and gamma.c > 0:
            c1, q1 = gamma.c, gamma.q
        elif isinstance(gamma, Constant) and gamma.c > 0:
            c1, q1 = gamma.c, 0.0
        else:
            return None
        if beta.is_zero():
            c2, q2 = 0.0, np.inf
        elif isinstance(beta, PowerDecay) and beta.c >= 0:
            c2, q2 = beta.c, beta.q
        elif isinstance(beta, Constant) and beta.c >= 0:
            c2, q2 = beta.c, 0.0
        else:
            return None
        exponents_ok = q1 <= 1 or mu.nu == 0
        exponents_ok = exponents_ok and (c == 0 or q1 <= (p - 1) * mu.nu + m)
        exponents_ok = exponents_ok and (c2 == 0 or q1 <= q2 - mu.nu)
        residual = c1 - mu.nu - c * mu.lam ** (1 - p) - mu.lam * c2
        cond = "q1 <= min(1, q2-nu, (p-1)nu) and c1 - nu - c0*lambda^(1-p) - lambda*c2 >= 0"
        return AnalyticReduction(bool(exponents_ok and residual >= 0), cond, residual)

    if isinstance(mu, ShiftedInversePowerMajorant) and mu.n > 0:
        # gamma = -c1(1+t)^-m1 (destabilizing) or >= 0; alpha = c2(1+t)^-m2 g^p
        if isinstance(gamma, PowerDecay):
            c1, m1 = max(0.0, -gamma.c), gamma.q
        elif isinstance(gamma, Constant):
            c1, m1 = max(0.0, -gamma.c), 0.0
        else:
            return None
        if c1 == 0:
            m1 = np.inf
        if not beta.is_zero():
            return None
        exponents_ok = mu.n + 1 <= min(m1, m if c > 0 else np.inf)
        # mu ranges over (d, d + lam]; the right side needs the largest mu
        residual = mu.n * mu.lam / (mu.d + mu.lam) - c1 - c * mu.d ** (1 - p)
        cond = "n+1 <= min(m1, m2) and c1 + c2*d^(1-p) <= n*lambda/(d+lambda)"
        return AnalyticReduction(bool(exponents_ok and residual >= 0), cond, residual)

    return None


def _stability_note(problem: InequalityProblem, verdict: Verdict) -> str:
    if verdict is Verdict.NOT_CERTIFIED:
        return "no conclusion"
    forced = not problem.beta.is_zero()
    base = "asymptotically stable" if verdict is Verdict.CERTIFIED_DECAYING else "Lyapunov stable (bounded)"
    if forced:
        return base + " under persistently acting perturbations"
    return base


def verify_certificate(
    problem: InequalityProblem,
    mu: Majorant,
    grid: GridSpec = GridSpec(),
    tolerance: float = 0.0,
) -> CertificateReport:
    """Check the certificate conditions for ``mu`` on a grid over [0, horizon].

    The report is verified when the sampled slack is >= -tolerance and
    mu(0) g0 <= 1. When the problem and majorant fall into a parametric
    family with a known t = 0 reduction, the reduction is evaluated too and
    reported alongside the grid result.
    """
    t = grid.points(problem.horizon)
    mu_t, slack = slack_profile(problem, mu, t)
    i_min = int(np.argmin(slack))
    min_slack = float(slack[i_min])
    product0 = mu_t[0] * problem.g0
    initial_ok = bool(product0 <= 1.0)
    strict_initial = bool(product0 < 1.0)
    verified = bool(min_slack >= -tolerance and initial_ok)
    decay = mu.tends_to_infinity()
    if not verified:
        verdict = Verdict.NOT_CERTIFIED
    elif decay:
        verdict = Verdict.CERTIFIED_DECAYING
    else:
        verdict = Verdict.CERTIFIED_BOUNDED
    t.setflags(write=False)
    slack.setflags(write=False)
    mu_t.setflags(write=False)
    return CertificateReport(
        verified=verified,
        initial_ok=initial_ok,
        strict_initial=strict_initial,
        slack=slack,
        min_slack=min_slack,
        argmin_time=float(t[i_min]),
        grid=t,
        mu_values=mu_t,
        bound=mu,
        asymptotic_decay=decay,
        verdict=verdict,
        tolerance=tolerance,
        marginal=bool(min_slack < MARGINAL_SLACK),
        analytic=analytic_reduction(problem, mu),
        stability=_stability_note(problem, verdict),
    )


@dataclass(frozen=True)
class BoundCheck:
    max_violation: float
    first_violation_time: Optional[float]
    passed: bool
    tol: float


def check_trajectory_bound(trajectory, mu: Majorant, tol: float = 0.0) -> BoundCheck:
    """Compare a trajectory's bounded quantity against 1/mu(t) sample by sample.

    For system trajectories the bounded quantity is ||u(t)||; for comparison
    trajectories it is the scalar g(t) itself, sign included.
    """
    times = np.asarray(trajectory.times, dtype=float)
    if times.size == 0:
        raise EmptyTrajectory("trajectory has no samples")
    values = np.asarray(trajectory.bounded_values, dtype=float)
    mu_t = np.asarray(mu.value(times), dtype=float)
    if np.any(~(mu_t > 0)):
        raise NonPositiveMajorant("mu(t) <= 0 on the trajectory time range")
    excess = values - 1.0 / mu_t
    worst = float(np.max(excess))
    over = np.nonzero(excess > tol)[0]
    first = float(times[over[0]]) if over.size else None
    return BoundCheck(worst, first, worst <= tol, tol)


def format_report(fields: dict) -> str:
    """Flat ``key: value`` text block."""
    lines = []
    for key, value in fields.items():
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = fmt(value) if np.isfinite(value) else str(value)
        elif value is None:
            text = "none"
        else:
            text = str(value)
        lines.append(f"{key}: {text}")
    return "\n".join(lines) + "\n"
