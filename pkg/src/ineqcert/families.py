"""Closed-form certificate designers for parametric problem families.

Each designer takes the constants of a concrete problem class, picks the
majorant parameters in closed form and checks the sufficient inequalities
that make the certificate hold for all t >= 0. Feasible designs convert to
an (InequalityProblem, Majorant) pair via ``to_certificate`` so they can be
re-checked numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .certcore import InequalityProblem
from .errors import BadEpsilon, BadExponent, BadRates, InvalidParameter
from .functions import (
    ZERO,
    Constant,
    Exponential,
    ExponentialMajorant,
    PowerDecay,
    PowerLaw,
    PowerMajorant,
    ShiftedInversePowerMajorant,
    TimeScaledPower,
)


@dataclass(frozen=True)
class Infeasible:
    """A design whose sufficient conditions fail; ``condition`` names the first failure."""

    condition: str
    detail: str
    residual: float = math.nan

    feasible = False


def _require_positive(**values):
    for name, value in values.items():
        if not value > 0:
            raise InvalidParameter(f"{name} must be > 0, got {value}")


def _require_exponent(p):
    if not p > 1:
        raise BadExponent(f"p must be > 1, got {p}")


# ---------------------------------------------------------------------------
# constant dissipativity rate, exponential majorant


@dataclass(frozen=True)
class ExponentialDecayDesign:
    k: float
    c0: float
    p: float
    epsilon: float
    lam: float
    b: float

    feasible = True

    @property
    def u0_radius(self) -> float:
        return 1.0 / self.lam

    def bound(self, t):
        return math.exp(-self.b * t) / self.lam

    def to_certificate(self, horizon=100.0, g0=None):
        g0 = self.u0_radius if g0 is None else g0
        problem = InequalityProblem(Constant(self.k), PowerLaw(self.c0, self.p), ZERO, g0, horizon)
        return problem, ExponentialMajorant(self.lam, self.b)


def design_exponential_decay(k: float, c0: float, p: float, epsilon: float) -> ExponentialDecayDesign:
    """Smallest admissible lambda = (c0/eps)^(1/(p-1)) and rate b = k - eps.

    For ||u0|| <= 1/lambda the solution obeys ||u(t)|| <= exp(-(k - eps) t) / lambda.
    """
    _require_positive(k=k, c0=c0)
    _require_exponent(p)
    if not 0 < epsilon < k:
        raise BadEpsilon(f"epsilon must lie in (0, k) = (0, {k}), got {epsilon}")
    lam = (c0 / epsilon) ** (1.0 / (p - 1.0))
    return ExponentialDecayDesign(k, c0, p, epsilon, lam, k - epsilon)


@dataclass(frozen=True)
class DecayRate:
    c0: float
    p: float
    u0_norm: float
    k: float
    rate: float

    feasible = True

    def bound(self, t):
        return self.u0_norm * math.exp(-self.rate * t)

    def to_certificate(self, horizon=100.0):
        if self.u0_norm == 0:
            raise InvalidParameter("zero initial data has no finite majorant scale")
        problem = InequalityProblem(Constant(self.k), PowerLaw(self.c0, self.p), ZERO, self.u0_norm, horizon)
        return problem, ExponentialMajorant(1.0 / self.u0_norm, self.rate)


def small_data_decay_rate(c0: float, p: float, u0_norm: float, k: float) -> Union[DecayRate, Infeasible]:
    """Decay rate k - c0 ||u0||^(p-1) when it is strictly positive."""
    _require_positive(c0=c0, k=k)
    _require_exponent(p)
    if not u0_norm >= 0:
        raise InvalidParameter(f"u0_norm must be >= 0, got {u0_norm}")
    load = c0 * u0_norm ** (p - 1.0)
    if not load < k:
        return Infeasible("c0*|u0|^(p-1) < k", f"c0*|u0|^(p-1) = {load:g} is not < k = {k:g}", k - load)
    return DecayRate(c0, p, u0_norm, k, k - load)


# ---------------------------------------------------------------------------
# power-law dissipativity, power majorant


@dataclass(frozen=True)
class PowerDecayDesign:
    c1: float
    q1: float
    c0: float
    p: float
    epsilon: float
    lam: float
    nu: float

    feasible = True

    @property
    def u0_radius(self) -> float:
        return 1.0 / self.lam

    def bound(self, t):
        return 1.0 / (self.lam * (1.0 + t) ** self.nu)

    def to_certificate(self, horizon=100.0, g0=None):
        g0 = self.u0_radius if g0 is None else g0
        problem = InequalityProblem(PowerDecay(self.c1, self.q1), PowerLaw(self.c0, self.p), ZERO, g0, horizon)
        return problem, PowerMajorant(self.lam, self.nu)


def design_power_decay(c1: float, q1: float, c0: float, p: float, epsilon: float) -> Union[PowerDecayDesign, Infeasible]:
    """nu = c1 - eps, lambda = (c0/eps)^(1/(p-1)) for gamma(t) = c1/(1+t)^q1."""
    _require_positive(c1=c1, q1=q1, c0=c0)
    _require_exponent(p)
    if not 0 < epsilon < c1:
        raise BadEpsilon(f"epsilon must lie in (0, c1) = (0, {c1}), got {epsilon}")
    nu = c1 - epsilon
    if not q1 <= 1:
        return Infeasible("q1 <= 1", f"q1 = {q1:g} > 1", 1 - q1)
    if not (p - 1) * nu >= q1:
        return Infeasible("(p-1)*nu >= q1", f"(p-1)*nu = {(p - 1) * nu:g} < q1 = {q1:g}", (p - 1) * nu - q1)
    lam = (c0 / epsilon) ** (1.0 / (p - 1.0))
    return PowerDecayDesign(c1, q1, c0, p, epsilon, lam, nu)


@dataclass(frozen=True)
class ForcedPowerDesign:
    c0: float
    c2: float
    p: float
    q1: float
    q2: float
    nu: float
    c1: float
    lambda0: float
    hmin: float

    feasible = True

    @property
    def u0_radius(self) -> float:
        return 1.0 / self.lambda0

    def bound(self, t):
        return 1.0 / (self.lambda0 * (1.0 + t) ** self.nu)

    def to_certificate(self, horizon=100.0, g0=None):
        g0 = self.u0_radius if g0 is None else g0
        problem = InequalityProblem(
            PowerDecay(self.c1, self.q1), PowerLaw(self.c0, self.p), PowerDecay(self.c2, self.q2), g0, horizon
        )
        return problem, PowerMajorant(self.lambda0, self.nu)


def forced_h(lam, c0: float, c2: float, p: float):
    """h(lambda) = c0 lambda^(1-p) + c2 lambda."""
    return c0 * lam ** (1.0 - p) + c2 * lam


def forced_lambda0(c0: float, c2: float, p: float) -> float:
    return ((p - 1.0) * c0 / c2) ** (1.0 / p)


def forced_hmin(c0: float, c2: float, p: float) -> float:
    return c0 ** (1.0 / p) * c2 ** (1.0 - 1.0 / p) * (p - 1.0) ** (1.0 / p) * p / (p - 1.0)


def design_forced_power_decay(c0: float, c2: float, p: float, q1: float, q2: float, nu: float, c1: float
                              ) -> Union[ForcedPowerDesign, Infeasible]:
    """Forced problem with beta(t) <= c2/(1+t)^q2: optimal lambda0 and its feasibility."""
    _require_positive(c0=c0, c2=c2, q1=q1, q2=q2, nu=nu, c1=c1)
    _require_exponent(p)
    lambda0 = forced_lambda0(c0, c2, p)
    hmin = forced_hmin(c0, c2, p)
    cap = min(1.0, q2 - nu, nu * (p - 1.0))
    if not q1 <= cap:
        return Infeasible("q1 <= min(1, q2-nu, nu*(p-1))", f"q1 = {q1:g} > min(1, q2-nu, nu(p-1)) = {cap:g}", cap - q1)
    if not hmin + nu <= c1:
        return Infeasible("hmin + nu <= c1", f"hmin + nu = {hmin + nu:g} > c1 = {c1:g}", c1 - hmin - nu)
    return ForcedPowerDesign(c0, c2, p, q1, q2, nu, c1, lambda0, hmin)


# ---------------------------------------------------------------------------
# destabilizing linear part, shifted inverse power majorant


@dataclass(frozen=True)
class BoundedGrowthDesign:
    c1: float
    c2: float
    m1: float
    m2: float
    p: float
    g0: float
    d: float
    lam: float
    n: float
    residual_loose: float
    residual_tight: float

    feasible = True

    @property
    def sup_bound(self) -> float:
        """Global bound 1/d = 2 g0 on ||u(t)||."""
        return 1.0 / self.d

    def bound(self, t):
        return 1.0 / (self.d + self.lam * (1.0 + t) ** (-self.n))

    def to_certificate(self, horizon=100.0):
        problem = InequalityProblem(
            PowerDecay(-self.c1, self.m1), TimeScaledPower(self.c2, self.m2, self.p), ZERO, self.g0, horizon
        )
        return problem, ShiftedInversePowerMajorant(self.d, self.lam, self.n)


def design_bounded_growth(c1: float, c2: float, m1: float, m2: float, p: float, g0: float
                          ) -> Union[BoundedGrowthDesign, Infeasible]:
    """d = lambda = 1/(2 g0), n = min(m1, m2) - 1 for gamma = -c1(1+t)^-m1 (growth allowed).

    Besides the published condition c1 + c2 d^(1-p) <= n, feasibility requires
    c1 + c2 d^(1-p) <= n lambda/(d + lambda) = n/2, because mu(t) climbs to
    d + lambda at t = 0 and the right-hand side must hold there too.
    """
    _require_positive(c1=c1, c2=c2, m1=m1, m2=m2, g0=g0)
    _require_exponent(p)
    d = 1.0 / (2.0 * g0)
    lam = d
    n = min(m1, m2) - 1.0
    load = c1 + c2 * d ** (1.0 - p)
    residual_loose = n * lam / d - load
    residual_tight = n * lam / (d + lam) - load
    if not n > 0:
        return Infeasible("n = min(m1, m2) - 1 > 0", f"n = min(m1, m2) - 1 = {n:g} is not > 0", n)
    if not residual_loose >= 0:
        return Infeasible("c1 + c2*d^(1-p) <= n*lambda/d", f"c1 + c2*d^(1-p) = {load:g} > n = {n:g}", residual_loose)
    if not residual_tight >= 0:
        return Infeasible(
            "c1 + c2*d^(1-p) <= n*lambda/(d+lambda)",
            f"c1 + c2*d^(1-p) = {load:g} > n*lambda/(d+lambda) = {n * lam / (d + lam):g}",
            residual_tight,
        )
    return BoundedGrowthDesign(c1, c2, m1, m2, p, g0, d, lam, n, residual_loose, residual_tight)


# ---------------------------------------------------------------------------
# time-dependent alpha(t) g^2 with exponentially decaying forcing


@dataclass(frozen=True)
class DecayingCoefficientDesign:
    alpha0: float
    lam: float
    k: float
    kprime: float
    nu_beta: float
    gamma: float

    feasible = True

    def bound(self, t):
        return math.exp(-self.k * t) / self.lam

    def to_certificate(self, horizon=100.0, alpha_decay=0.0, g0=None):
        """Worst case of the family: alpha(t) = alpha0 (1+t)^-alpha_decay, beta = nu e^{-k't}."""
        g0 = 1.0 / self.lam if g0 is None else g0
        if alpha_decay < 0:
            raise InvalidParameter("alpha(t) must be nonincreasing: alpha_decay >= 0")
        alpha = PowerLaw(self.alpha0, 2.0) if alpha_decay == 0 else TimeScaledPower(self.alpha0, alpha_decay, 2.0)
        beta = Exponential(self.nu_beta, self.kprime) if self.nu_beta > 0 else ZERO
        problem = InequalityProblem(Constant(self.gamma), alpha, beta, g0, horizon)
        return problem, ExponentialMajorant(self.lam, self.k)


def check_decaying_coefficient(alpha0: float, lam: float, k: float, kprime: float, nu_beta: float, gamma: float
                               ) -> Union[DecayingCoefficientDesign, Infeasible]:
    """alpha(0)/lambda < (gamma-k)/2 and lambda*nu <= (gamma-k)/2 give ||u|| <= e^{-kt}/lambda."""
    _require_positive(alpha0=alpha0, lam=lam, k=k, gamma=gamma)
    if not nu_beta >= 0:
        raise InvalidParameter(f"nu_beta must be >= 0, got {nu_beta}")
    if not k < gamma:
        raise BadRates(f"need k < gamma, got k={k}, gamma={gamma}")
    if not kprime > k:
        raise BadRates(f"need kprime > k, got kprime={kprime}, k={k}")
    half_gap = (gamma - k) / 2.0
    if not alpha0 / lam < half_gap:
        return Infeasible("alpha(0)/lambda < (gamma-k)/2",
                          f"alpha0/lambda = {alpha0 / lam:g} >= {half_gap:g}", half_gap - alpha0 / lam)
    if not lam * nu_beta <= half_gap:
        return Infeasible("lambda*nu <= (gamma-k)/2",
                          f"lambda*nu = {lam * nu_beta:g} > {half_gap:g}", half_gap - lam * nu_beta)
    return DecayingCoefficientDesign(alpha0, lam, k, kprime, nu_beta, gamma)


# short aliases
design_thm3 = design_exponential_decay
check_remark3 = small_data_decay_rate
design_thm4 = design_power_decay
design_thm5 = design_forced_power_decay
design_thm6 = design_bounded_growth
check_example4 = check_decaying_coefficient
