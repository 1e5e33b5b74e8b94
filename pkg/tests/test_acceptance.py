"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Every tolerance used here is pinned as a module constant. Run standalone with
``python3 tests/test_acceptance.py`` or through pytest (the lines then appear
in the terminal summary).
"""
import math
import sys
from pathlib import Path

import numpy as np
import pytest

from ineqcert.certcore import GridSpec, InequalityProblem, check_trajectory_bound, verify_certificate
from ineqcert.cli import evaluate
from ineqcert.config import load_config
from ineqcert.discrete import (
    DiscreteCertificate,
    DiscreteProblem,
    inductive_step_check,
    run_recursion,
    verify_discrete_certificate,
)
from ineqcert.families import (
    check_decaying_coefficient,
    design_exponential_decay,
    design_power_decay,
    design_forced_power_decay,
    design_bounded_growth,
    forced_h,
    forced_hmin,
    forced_lambda0,
)
from ineqcert.functions import (
    ZERO,
    ZERO_ALPHA,
    Constant,
    CustomMajorant,
    ExponentialMajorant,
    PowerDecay,
    PowerLaw,
    ShiftedInversePowerMajorant,
    TimeScaledPower,
)
from ineqcert.odesim import (
    EvolutionSystem,
    IntegratorOptions,
    Status,
    blowup_oracle_cubic,
    check_comparison,
    integrate,
    integrate_comparison,
    integrate_system,
    lipschitz_interval,
    peano_interval,
)

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # standalone run
    ACCEPTANCE_LINES = []

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"

# pinned tolerances
BOUND_VIOLATION_TOL = 1e-9      # criteria 1, 4, 6: trajectory vs 1/mu
GROWTH_LEVEL = 1e6              # criterion 2
GROWTH_DEADLINE = 8.0
TB_ABS_TOL = 1e-3               # criterion 3
CUBIC_PROBE_T = 0.375
CUBIC_PROBE_RTOL = 1e-6
OPTIMALITY_ABS_TOL = 1e-12      # criterion 5
HMIN_RTOL = 1e-12
OPT_TRIALS = 200
OPT_GRID = 400
DISCRETE_RTOL = 1e-12           # criterion 7
DISCRETE_TRIALS = 500
RESIDUAL_PAIRS = 10_000
TIGHT_RTOL = 1e-12
COMPARISON_TRIALS = 500         # criterion 8
INTERVAL_CASES = 100            # criterion 9
DESIGN_SLACK_TOL = 1e-12        # criterion 10
DESIGN_HORIZON = 100.0


def record(label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def samples(horizon, n=1001):
    return IntegratorOptions().with_samples(np.linspace(0.0, horizon, n))


def ac01_damped_quadratic_certificate():
    cfg = load_config(SCENARIOS / "damped_quadratic_certify.toml")
    problem, mu = cfg.built["problem"], cfg.built["majorant"]
    rep = verify_certificate(problem, mu)
    outcome = evaluate(cfg)
    traj = integrate_comparison(problem, opts=samples(problem.horizon))
    check = check_trajectory_bound(traj, mu, BOUND_VIOLATION_TOL)
    ok = (rep.verified and rep.min_slack >= 0 and problem.horizon == 50.0 and outcome.code == 0
          and outcome.report["bound"] == "1/(1+t)" and check.passed)
    return record("AC01 damped quadratic certificate", ok,
                  f"verified={rep.verified} min_slack={rep.min_slack:.3g} "
                  f"max_violation={check.max_violation:.3g} (tol {BOUND_VIOLATION_TOL:g}) "
                  f"trajectory={traj.status.value}@{traj.final_time:g}")


def ac02_linearized_growth():
    system = EvolutionSystem(lambda t: np.array([[t]]), [1.0], b=lambda t: np.array([-2.0 / (1.0 + t) ** 2]))
    traj = integrate_system(system, GROWTH_DEADLINE, samples(GROWTH_DEADLINE, 8001))
    over = np.nonzero(traj.norms > GROWTH_LEVEL)[0]
    first = float(traj.times[over[0]]) if over.size else math.inf
    mu = CustomMajorant.from_function(PowerDecay(1.0, -1.0))
    bound = check_trajectory_bound(traj, mu, BOUND_VIOLATION_TOL)
    ok = first < GROWTH_DEADLINE and not bound.passed
    return record("AC02 linear part alone escapes", ok,
                  f"|g| > {GROWTH_LEVEL:g} first at t={first:g} (< {GROWTH_DEADLINE:g}); "
                  f"bound 1/(1+t) violated by {bound.max_violation:.3g}")


def ac03_cubic_blowup():
    traj = integrate(lambda t, x: x ** 3, [1.0], 0.0, 1.0, IntegratorOptions().with_samples([0.0, CUBIC_PROBE_T]))
    value = float(traj.states[1, 0])
    oracle = blowup_oracle_cubic(1.0, 1.0, CUBIC_PROBE_T)
    rel = abs(value - oracle) / oracle
    tb_err = abs(traj.tb_estimate - 0.5) if traj.tb_estimate is not None else math.inf
    ok = traj.status is Status.BLOWUP and tb_err <= TB_ABS_TOL and oracle == 2.0 and rel <= CUBIC_PROBE_RTOL
    return record("AC03 cubic blow-up", ok,
                  f"status={traj.status.value} tb={float(traj.tb_estimate or math.nan):.12g} |tb-0.5|={tb_err:.3g} (tol {TB_ABS_TOL:g}); "
                  f"u(0.375) rel err={rel:.3g} (tol {CUBIC_PROBE_RTOL:g})")


def ac04_exponential_design_end_to_end():
    d = design_exponential_decay(1.0, 1.0, 2.0, 0.5)
    problem = InequalityProblem(Constant(1.0), PowerLaw(1.0, 2.0), ZERO, 0.5, 30.0)
    traj = integrate_comparison(problem, opts=samples(30.0))
    scalar = check_trajectory_bound(traj, ExponentialMajorant(d.lam, d.b), BOUND_VIOLATION_TOL)
    k, c0, p, r0 = 1.0, 0.1, 2.0, 0.3
    A = np.array([[-k, 5.0], [-5.0, -k]])
    system = EvolutionSystem(A, [r0, 0.0], lambda t, u: c0 * np.linalg.norm(u) ** (p - 1) * u, gamma=Constant(k))
    straj = integrate_system(system, 30.0, samples(30.0))
    rate = k - c0 * r0 ** (p - 1)
    vector = check_trajectory_bound(straj, ExponentialMajorant(1.0 / r0, rate), BOUND_VIOLATION_TOL)
    ok = (d.lam, d.b) == (2.0, 0.5) and scalar.passed and vector.passed and straj.status is Status.COMPLETED
    return record("AC04 exponential design end to end", ok,
                  f"lambda={d.lam:g} b={d.b:g}; scalar violation={scalar.max_violation:.3g}; "
                  f"2-D violation={vector.max_violation:.3g} (tol {BOUND_VIOLATION_TOL:g})")


def ac05_forced_optimality():
    rng = np.random.default_rng(20240501)
    worst_gap, worst_rel = -math.inf, 0.0
    for _ in range(OPT_TRIALS):
        c0, c2 = rng.uniform(0.05, 10.0, 2)
        p = rng.uniform(1.05, 6.0)
        lam0 = forced_lambda0(c0, c2, p)
        grid = np.geomspace(lam0 / 100.0, lam0 * 100.0, OPT_GRID)
        h0 = forced_h(lam0, c0, c2, p)
        worst_gap = max(worst_gap, float(np.max(h0 - forced_h(grid, c0, c2, p))))
        closed = c0 ** (1 / p) * c2 ** (1 - 1 / p) * (p - 1) ** (1 / p) * p / (p - 1)
        worst_rel = max(worst_rel, abs(forced_hmin(c0, c2, p) - closed) / closed, abs(h0 - closed) / closed)
    ok = worst_gap <= OPTIMALITY_ABS_TOL and worst_rel <= HMIN_RTOL
    return record("AC05 forced-decay optimal lambda", ok,
                  f"{OPT_TRIALS} trials: max h(lambda0)-h(lambda)={worst_gap:.3g} (tol {OPTIMALITY_ABS_TOL:g}); "
                  f"hmin rel err={worst_rel:.3g} (tol {HMIN_RTOL:g})")


def ac06_bounded_growth():
    d = design_bounded_growth(0.1, 0.1, 3.0, 3.0, 2.0, 0.5)
    problem = InequalityProblem(PowerDecay(-0.1, 3.0), TimeScaledPower(0.1, 3.0, 2.0), ZERO, 0.5, 100.0)
    mu = ShiftedInversePowerMajorant(d.d, d.lam, d.n)
    rep = verify_certificate(problem, mu)
    traj = integrate_comparison(problem, opts=samples(100.0))
    check = check_trajectory_bound(traj, mu, BOUND_VIOLATION_TOL)
    sup_ok = bool(np.all(traj.states[:, 0] <= 2 * 0.5 + BOUND_VIOLATION_TOL))
    ok = d.feasible and (d.d, d.lam, d.n) == (1.0, 1.0, 2.0) and rep.verified and check.passed and sup_ok
    return record("AC06 bounded growth regime", ok,
                  f"(d, lambda, n)=({d.d:g}, {d.lam:g}, {d.n:g}) verified={rep.verified} "
                  f"violation={check.max_violation:.3g} max g={traj.states[:, 0].max():.6g} <= 2*g0")


def _random_discrete(rng):
    N = int(rng.integers(1, 300))
    h = rng.uniform(1e-3, 0.2, N)
    gamma = np.minimum(rng.uniform(0.2, 5.0, N), 0.95 / h)
    c0 = rng.uniform(0.05, 3.0)
    p = rng.uniform(1.5, 4.0)
    beta = rng.uniform(0.0, 0.01, N)
    # mu_{n+1} = mu_n (1 + h gamma / 4) with mu_0 large enough that alpha and beta fit in gamma/4 each
    mu = np.empty(N + 1)
    mu[0] = max((4.0 * c0 / gamma.min()) ** (1.0 / (p - 1.0)), 1.0) * rng.uniform(1.0, 2.0)
    for n in range(N):
        mu[n + 1] = mu[n] * (1.0 + h[n] * gamma[n] / 4.0)
    beta = np.minimum(beta, gamma / (4.0 * mu[:-1]))
    g0 = rng.uniform(0.0, 1.0) / mu[0]
    return DiscreteProblem(N, h, gamma, beta, PowerLaw(c0, p), g0), DiscreteCertificate(mu)


def ac07_discrete_suite():
    rng = np.random.default_rng(7)
    verified = held = 0
    for _ in range(DISCRETE_TRIALS):
        problem, cert = _random_discrete(rng)
        rep = verify_discrete_certificate(problem, cert)
        inv = 1.0 / cert.mu_seq
        verified += rep.verified
        held += bool(rep.verified and np.all(rep.g <= inv + DISCRETE_RTOL * (1.0 + inv)))
    pairs = rng.uniform(1e-3, 1e3, (RESIDUAL_PAIRS, 2))
    residual_min = min(inductive_step_check(a, b) for a, b in pairs)
    h, gamma, g0, mu0, N = 0.05, 3.0, 2.0, 0.4, 200
    tight = DiscreteProblem(N, h, gamma, 0.0, ZERO_ALPHA, g0)
    product = run_recursion(tight).g * mu0 * (1 - h * gamma) ** -np.arange(N + 1, dtype=float)
    spread = float(np.max(np.abs(product / (g0 * mu0) - 1.0)))
    ok = verified == held == DISCRETE_TRIALS and residual_min >= 0 and spread <= TIGHT_RTOL
    return record("AC07 discrete certificate suite", ok,
                  f"{held}/{DISCRETE_TRIALS} bounded (rtol {DISCRETE_RTOL:g}); residual min={residual_min:.3g} "
                  f"over {RESIDUAL_PAIRS} pairs; geometric product spread={spread:.3g} (tol {TIGHT_RTOL:g})")


def ac08_comparison_suite():
    rng = np.random.default_rng(8)
    holds = 0
    opts = IntegratorOptions(rtol=1e-9, atol=1e-12)
    for _ in range(COMPARISON_TRIALS):
        a, c = rng.uniform(-3.0, 3.0, 2)
        phi0 = rng.uniform(-2.0, 2.0)
        psi0 = phi0 + rng.uniform(0.0, 1.0)
        f = lambda t, x, a=a: a * np.sin(t) - x  # noqa: E731
        g = lambda t, x, a=a, c=c: a * np.sin(t) - x + abs(c)  # noqa: E731
        holds += check_comparison(f, g, phi0, psi0, 5.0, opts=opts).holds
    same = lambda t, x: np.sin(t) - x + 0.1 * x ** 2  # noqa: E731
    eq = check_comparison(same, same, 0.5, 0.5, 5.0, opts=opts)
    ok = holds == COMPARISON_TRIALS and eq.holds and abs(eq.max_gap_violation) <= eq.tol
    return record("AC08 comparison property suite", ok,
                  f"{holds}/{COMPARISON_TRIALS} hold; equal problems max gap={eq.max_gap_violation:.3g} "
                  f"(integration tol {eq.tol:.3g})")


def ac09_local_existence():
    rng = np.random.default_rng(9)
    peano_branches, lip_branches, mismatches = set(), set(), 0
    for i in range(INTERVAL_CASES):
        T, b, M = rng.uniform(0.01, 5.0, 3)
        R, M2, L = rng.uniform(0.01, 5.0, 3)
        if i % 2:  # force the other branch half the time
            T, L = b / M * 2.0, R / M2 * 2.0
        mismatches += peano_interval(T, b, M) != min(T, b / M)
        mismatches += lipschitz_interval(R, M2, L) != min(R / M2, L)
        peano_branches.add(T <= b / M)
        lip_branches.add(R / M2 <= L)
    ok = mismatches == 0 and peano_branches == {True, False} and lip_branches == {True, False}
    return record("AC09 local existence intervals", ok,
                  f"{INTERVAL_CASES} cases, {mismatches} mismatches, both branches covered")


def _design_cases(rng):
    yield design_exponential_decay(1.0, 1.0, 2.0, 0.5)
    yield design_power_decay(2.0, 1.0, 1.0, 2.0, 0.5)
    yield design_forced_power_decay(1.0, 1.0, 2.0, 0.5, 1.5, 0.5, 3.0)
    yield design_bounded_growth(0.1, 0.1, 3.0, 3.0, 2.0, 0.5)
    yield check_decaying_coefficient(0.1, 1.0, 0.5, 1.0, 0.2, 2.0)
    for _ in range(20):
        k, c0, p = rng.uniform(0.2, 3.0), rng.uniform(0.05, 3.0), rng.uniform(1.2, 4.0)
        yield design_exponential_decay(k, c0, p, k * rng.uniform(0.05, 0.95))
        c1 = rng.uniform(0.5, 4.0)
        yield design_power_decay(c1, rng.uniform(0.1, 1.0), c0, p, c1 * rng.uniform(0.05, 0.95))
        yield design_forced_power_decay(c0, rng.uniform(0.05, 2.0), p, rng.uniform(0.05, 1.0), rng.uniform(1.0, 3.0),
                          rng.uniform(0.1, 1.0), rng.uniform(1.0, 8.0))
        yield design_bounded_growth(rng.uniform(0.01, 0.5), rng.uniform(0.01, 0.5), rng.uniform(1.5, 5.0),
                          rng.uniform(1.5, 5.0), p, rng.uniform(0.1, 2.0))
        gamma = rng.uniform(0.5, 3.0)
        k = gamma * rng.uniform(0.1, 0.9)
        yield check_decaying_coefficient(rng.uniform(0.01, 1.0), rng.uniform(0.2, 3.0), k, k + rng.uniform(0.1, 2.0),
                             rng.uniform(0.0, 0.5), gamma)


def ac10_designer_consistency():
    rng = np.random.default_rng(10)
    feasible = passed = 0
    worst = math.inf
    for design in _design_cases(rng):
        if not design.feasible:
            continue
        feasible += 1
        problem, mu = design.to_certificate(horizon=DESIGN_HORIZON)
        rep = verify_certificate(problem, mu, GridSpec(), tolerance=DESIGN_SLACK_TOL)
        worst = min(worst, rep.min_slack)
        passed += rep.verified and rep.min_slack >= -DESIGN_SLACK_TOL
    ok = feasible > 5 and passed == feasible
    return record("AC10 designer-certificate consistency", ok,
                  f"{passed}/{feasible} feasible designs verified over [0, {DESIGN_HORIZON:g}]; "
                  f"worst min_slack={worst:.3g} (tol {DESIGN_SLACK_TOL:g})")


CRITERIA = [
    ac01_damped_quadratic_certificate,
    ac02_linearized_growth,
    ac03_cubic_blowup,
    ac04_exponential_design_end_to_end,
    ac05_forced_optimality,
    ac06_bounded_growth,
    ac07_discrete_suite,
    ac08_comparison_suite,
    ac09_local_existence,
    ac10_designer_consistency,
]


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda f: f.__name__)
def test_acceptance(criterion):
    assert criterion()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
