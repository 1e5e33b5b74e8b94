"""Discrete analogue of the certificate: the recursion

    g_{n+1} <= (1 - h_n gamma_n) g_n + h_n alpha(n, g_n) + h_n beta_n

is bounded by 1/mu_n whenever

    alpha(n, 1/mu_n) + beta_n <= (1/mu_n) (gamma_n - (mu_{n+1} - mu_n)/(h_n mu_n))

and g_0 <= 1/mu_0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParameter, LengthMismatch, NegativeAlpha, NonPositiveMu, StepConstraint
from .functions import Nonlinearity, fmt

BOUND_RTOL = 1e-12


def _seq(values, n, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape != (n,):
        raise LengthMismatch(f"{name} has length {arr.size}, expected {n}")
    return arr


@dataclass(frozen=True)
class DiscreteProblem:
    """N steps of the recursion. Scalars for h, gamma, beta broadcast to length N.

    ``alpha`` is called as alpha(n, g) with the step index n.
    """

    N: int
    h: np.ndarray
    gamma_seq: np.ndarray
    beta_seq: np.ndarray
    alpha: Nonlinearity
    g0: float

    def __post_init__(self):
        if self.N < 0:
            raise InvalidParameter("N must be >= 0")
        object.__setattr__(self, "h", _seq(self.h, self.N, "h"))
        object.__setattr__(self, "gamma_seq", _seq(self.gamma_seq, self.N, "gamma_seq"))
        object.__setattr__(self, "beta_seq", _seq(self.beta_seq, self.N, "beta_seq"))
        if not self.g0 >= 0:
            raise InvalidParameter(f"g0 must be >= 0, got {self.g0}")
        if not getattr(self.alpha, "monotone_in_g", False):
            raise InvalidParameter("the discrete bound needs a nonlinearity declared monotone in g")

    def check_steps(self):
        hg = self.h * self.gamma_seq
        bad = np.nonzero(~((self.h > 0) & (hg > 0) & (hg < 1)))[0]
        if bad.size:
            n = int(bad[0])
            raise StepConstraint(f"h_n*gamma_n = {hg[n]:g} at n={n} is outside (0, 1)")


@dataclass(frozen=True)
class Recursion:
    g: np.ndarray
    overflow_at: Optional[int] = None


def run_recursion(problem: DiscreteProblem) -> Recursion:
    """Worst-case (equality) sequence g_0..g_N."""
    problem.check_steps()
    g = np.empty(problem.N + 1)
    g[0] = problem.g0
    overflow = None
    for n in range(problem.N):
        a = float(problem.alpha(n, g[n]))
        if a < 0:
            raise NegativeAlpha(f"alpha(n, g_n) = {a:g} < 0 at n={n}")
        h = problem.h[n]
        g[n + 1] = (1.0 - h * problem.gamma_seq[n]) * g[n] + h * a + h * problem.beta_seq[n]
        if not np.isfinite(g[n + 1]):
            overflow = n + 1
            g[n + 2:] = np.nan
            break
    return Recursion(g, overflow)


@dataclass(frozen=True)
class DiscreteCertificate:
    """mu_0..mu_N; the slack at step n needs mu_{n+1}, hence N+1 entries."""

    mu_seq: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu_seq, dtype=float)
        if mu.ndim != 1:
            raise LengthMismatch("mu_seq must be one-dimensional")
        if np.any(~(mu > 0)):
            raise NonPositiveMu(f"mu_n <= 0 at n={int(np.argmax(~(mu > 0)))}")
        object.__setattr__(self, "mu_seq", mu)


@dataclass(frozen=True)
class DiscreteReport:
    verified: bool
    initial_ok: bool
    slack_seq: np.ndarray
    min_slack: float
    g: np.ndarray
    mu_seq: np.ndarray
    bound_holds: Optional[bool]
    max_excess: float

    def csv_lines(self) -> list[str]:
        lines = ["n,g_n,mu_n,inv_mu_n,slack_n"]
        for n, (gn, mu) in enumerate(zip(self.g, self.mu_seq)):
            slack = fmt(self.slack_seq[n]) if n < len(self.slack_seq) else ""
            lines.append(f"{n},{fmt(gn)},{fmt(mu)},{fmt(1.0 / mu)},{slack}")
        return lines


def discrete_slack(problem: DiscreteProblem, cert: DiscreteCertificate) -> np.ndarray:
    mu = cert.mu_seq
    if mu.size != problem.N + 1:
        raise LengthMismatch(f"mu_seq has {mu.size} entries, expected N+1 = {problem.N + 1}")
    n = np.arange(problem.N)
    inv = 1.0 / mu[:-1]
    growth = (mu[1:] - mu[:-1]) / (problem.h * mu[:-1])
    alpha = np.array([float(problem.alpha(int(i), inv[i])) for i in n])
    return inv * (problem.gamma_seq - growth) - alpha - problem.beta_seq


def verify_discrete_certificate(problem: DiscreteProblem, cert: DiscreteCertificate,
                                tolerance: float = 0.0) -> DiscreteReport:
    """Check slack_n >= -tolerance and g_0 mu_0 <= 1, then compare against the recursion."""
    slack = discrete_slack(problem, cert)
    initial_ok = bool(problem.g0 * cert.mu_seq[0] <= 1.0)
    min_slack = float(np.min(slack)) if slack.size else np.inf
    verified = bool(initial_ok and min_slack >= -tolerance)
    g = run_recursion(problem).g
    inv = 1.0 / cert.mu_seq
    excess = g - inv
    max_excess = float(np.nanmax(excess))
    bound_holds = None
    if verified:
        bound_holds = bool(np.all(g <= inv + BOUND_RTOL * (1.0 + inv)) and np.all(g >= 0))
    return DiscreteReport(verified, initial_ok, slack, min_slack, g, cert.mu_seq, bound_holds, max_excess)


def inductive_step_check(mu_m: float, mu_m1: float) -> float:
    """Residual 1/mu_{m+1} - [1/mu_m - (mu_{m+1} - mu_m)/mu_m^2] of the induction step.

    Returned in the cancellation-free form (mu_m - mu_{m+1})^2 / (mu_m^2 mu_{m+1}),
    which is nonnegative by construction.
    """
    if not (mu_m > 0 and mu_m1 > 0):
        raise NonPositiveMu("mu values must be > 0")
    return (mu_m - mu_m1) ** 2 / (mu_m ** 2 * mu_m1)


def inductive_residual_direct(mu_m: float, mu_m1: float) -> float:
    """Same residual evaluated term by term, as written in the induction."""
    return 1.0 / mu_m1 - (1.0 / mu_m - (mu_m1 - mu_m) / mu_m ** 2)


def step_margin(mu_m: float, mu_m1: float, h_m: float, gamma_m: float, alpha_val: float, beta_m: float) -> float:
    """1/mu_{m+1} minus the worst g_{m+1} reachable from g_m = 1/mu_m.

    Splits as h_m * slack_m + inductive_step_check(mu_m, mu_m1); nonnegative
    whenever slack_m is.
    """
    worst_next = (1.0 - h_m * gamma_m) / mu_m + h_m * alpha_val + h_m * beta_m
    return 1.0 / mu_m1 - worst_next
