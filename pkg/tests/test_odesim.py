import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.integrate import solve_ivp

from ineqcert.certcore import InequalityProblem
from ineqcert.errors import DimensionMismatch, HypothesisViolated, InvalidParameter, PastBlowup
from ineqcert.functions import ZERO, ZERO_ALPHA, Constant, PowerLaw
from ineqcert.odesim import (
    ORDER,
    EvolutionSystem,
    IntegratorOptions,
    ScalarIVP,
    Status,
    blowup_oracle_cubic,
    blowup_oracle_quadratic_lower,
    check_comparison,
    cubic_blowup_time,
    integrate,
    integrate_comparison,
    integrate_scalar,
    integrate_system,
    lipschitz_interval,
    norm_right_derivative,
    peano_interval,
    quadratic_blowup_time,
)


def test_linear_decay_matches_exponential():
    problem = InequalityProblem(Constant(1.0), ZERO_ALPHA, ZERO, 1.0, 1.0)
    traj = integrate_comparison(problem)
    assert traj.status is Status.COMPLETED
    assert_allclose(traj.states[-1, 0], math.exp(-1.0), rtol=1e-8)


def test_worst_case_exponential_design():
    problem = InequalityProblem(Constant(1.0), PowerLaw(1.0, 2.0), ZERO, 0.5, 30.0)
    traj = integrate_comparison(problem, opts=IntegratorOptions().with_samples(np.linspace(0, 30, 301)))
    assert traj.status is Status.COMPLETED
    assert np.all(traj.states[:, 0] * 2 * np.exp(0.5 * traj.times) <= 1 + 1e-9)


def test_negative_phi0_rejected():
    problem = InequalityProblem(Constant(1.0), ZERO_ALPHA, ZERO, 1.0, 1.0)
    with pytest.raises(InvalidParameter):
        integrate_comparison(problem, phi0=-0.1)


def test_agrees_with_scipy_reference():
    rhs = lambda t, x: np.array([-0.5 * x[0] + math.sin(t) * x[0] ** 2])  # noqa: E731
    times = np.linspace(0.0, 8.0, 41)
    ours = integrate(rhs, [0.8], 0.0, 8.0, IntegratorOptions().with_samples(times))
    ref = solve_ivp(rhs, (0.0, 8.0), [0.8], t_eval=times, method="DOP853", rtol=1e-12, atol=1e-14)
    assert_allclose(ours.states[:, 0], ref.y[0], rtol=1e-8, atol=1e-12)


def test_dense_output_hits_requested_samples():
    times = np.array([0.0, 0.123, 0.5, 1.77, 3.0])
    traj = integrate(lambda t, x: -x, [1.0], 0.0, 3.0, IntegratorOptions().with_samples(times))
    assert_allclose(traj.times, times)
    assert_allclose(traj.states[:, 0], np.exp(-times), rtol=1e-8)


def test_samples_outside_window_rejected():
    with pytest.raises(InvalidParameter):
        integrate(lambda t, x: -x, [1.0], 0.0, 1.0, IntegratorOptions().with_samples([2.0]))


def test_convergence_order():
    # global error against accepted steps on x' = -x over four tolerance decades
    errors, steps = [], []
    for tol in np.logspace(-5, -9, 5):
        traj = integrate(lambda t, x: -x, [1.0], 0.0, 10.0, IntegratorOptions(rtol=tol, atol=tol * 1e-2))
        errors.append(abs(traj.states[-1, 0] - math.exp(-10.0)))
        steps.append(traj.n_steps)
    slope = np.polyfit(np.log(steps), np.log(errors), 1)[0]
    assert abs(-slope - ORDER) <= 0.5


class TestSystems:
    def test_damped_rotation_small_data_bound(self):
        A = np.array([[-1.0, 5.0], [-5.0, -1.0]])
        system = EvolutionSystem(A, [0.3, 0.0], lambda t, u: 0.1 * np.linalg.norm(u) * u, gamma=Constant(1.0))
        traj = integrate_system(system, 30.0, IntegratorOptions().with_samples(np.linspace(0, 30, 301)))
        assert traj.status is Status.COMPLETED
        rate = 1.0 - 0.1 * 0.3
        assert np.all(traj.norms <= 0.3 * np.exp(-rate * traj.times) + 1e-9)
        # decay is monotone until the norm reaches the absolute tolerance floor
        above = traj.norms > 1e-9
        assert np.all(np.diff(traj.norms[above]) < 0)

    def test_zero_field_constant(self):
        system = EvolutionSystem(np.zeros((3, 3)), [1.0, -2.0, 2.0])
        traj = integrate_system(system, 5.0)
        assert_allclose(traj.norms, 3.0)

    def test_cubic_blowup(self):
        system = EvolutionSystem([[0.0]], [1.0], lambda t, u: u ** 3)
        traj = integrate_system(system, 1.0)
        assert traj.status is Status.BLOWUP
        assert abs(traj.tb_estimate - 0.5) <= 1e-3

    def test_cubic_solution_matches_oracle(self):
        opts = IntegratorOptions().with_samples([0.0, 0.375])
        traj = integrate(lambda t, x: x ** 3, [1.0], 0.0, 1.0, opts)
        assert_allclose(traj.states[1, 0], 2.0, rtol=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            EvolutionSystem(np.eye(2), [1.0, 2.0, 3.0])
        with pytest.raises(DimensionMismatch):
            EvolutionSystem(np.eye(2), [1.0, 2.0], b=[1.0])

    def test_time_dependent_fields(self):
        system = EvolutionSystem(lambda t: np.array([[-t]]), [1.0], b=lambda t: np.array([0.0]))
        traj = integrate_system(system, 2.0, IntegratorOptions().with_samples([2.0]))
        assert_allclose(traj.states[-1, 0], math.exp(-2.0), rtol=1e-8)

    def test_dissipativity_sampling(self):
        A = np.array([[-1.0, 5.0], [-5.0, -1.0]])
        system = EvolutionSystem(A, [0.3, 0.0], gamma=Constant(1.0))
        assert system.dissipativity_excess(10.0, n=1000, seed=0) <= 1e-9
        too_strong = EvolutionSystem(A, [0.3, 0.0], gamma=Constant(1.5))
        assert too_strong.dissipativity_excess(10.0, seed=0) > 0

    def test_norm_through_zero(self):
        system = EvolutionSystem([[0.0]], [-1.0], b=[1.0])
        times = np.linspace(0.0, 2.0, 201)
        traj = integrate_system(system, 2.0, IntegratorOptions().with_samples(times))
        assert np.all(traj.norms >= 0)
        assert np.max(np.abs(np.diff(traj.norms))) <= 0.01 + 1e-12
        assert_allclose(traj.norms, np.abs(times - 1.0), atol=1e-12)

    @pytest.mark.parametrize(
        "u, du, expected",
        [([3.0, 4.0], [1.0, 0.0], 0.6), ([0.0, 0.0], [3.0, 4.0], 5.0), ([-2.0], [1.0], -1.0)],
    )
    def test_norm_right_derivative(self, u, du, expected):
        assert_allclose(norm_right_derivative(u, du), expected)


class TestOracles:
    def test_cubic(self):
        assert blowup_oracle_cubic(1.0, 1.0, 0.375) == pytest.approx(2.0)
        assert cubic_blowup_time(1.0, 1.0) == 0.5
        assert cubic_blowup_time(-1.0, 1.0) == math.inf
        assert blowup_oracle_cubic(-1.0, 1.0, 1e6) < 1e-3

    def test_cubic_past_blowup(self):
        with pytest.raises(PastBlowup):
            blowup_oracle_cubic(1.0, 1.0, 0.5)

    def test_quadratic(self):
        assert blowup_oracle_quadratic_lower(1.0, 1.0, 0.5) == pytest.approx(2.0)
        assert quadratic_blowup_time(1.0, 1.0) == 1.0
        assert blowup_oracle_quadratic_lower(0.7, 2.0, 0.0) == pytest.approx(0.7)
        with pytest.raises(PastBlowup):
            blowup_oracle_quadratic_lower(1.0, 1.0, 1.0)

    @pytest.mark.parametrize("g0, c", [(0.5, 2.0), (1.0, 1.0), (2.0, 0.25)])
    def test_quadratic_blowup_detected(self, g0, c):
        traj = integrate_scalar(ScalarIVP(lambda t, x: c * x * x, g0, 0.0, 3.0 / (c * g0)))
        assert traj.status is Status.BLOWUP
        assert abs(traj.tb_estimate - quadratic_blowup_time(g0, c)) <= 1e-3 * quadratic_blowup_time(g0, c)


@pytest.mark.parametrize(
    "T, b, M, expected", [(10.0, 1.0, 4.0, 0.25), (0.1, 1.0, 4.0, 0.1), (10.0, 2.0, 1.0, 2.0)]
)
def test_peano_interval(T, b, M, expected):
    assert peano_interval(T, b, M) == expected


@pytest.mark.parametrize(
    "R, M, L, expected", [(1.0, 2.0, 3.0, 0.5), (2.0, 2.0, 3.0, 1.0), (2.0, 2.0, 0.5, 0.5), (4.0, 1.0, 0.1, 0.1)]
)
def test_lipschitz_interval(R, M, L, expected):
    assert lipschitz_interval(R, M, L) == expected


def test_interval_preconditions():
    with pytest.raises(InvalidParameter):
        peano_interval(0.0, 1.0, 1.0)
    with pytest.raises(InvalidParameter):
        lipschitz_interval(1.0, -1.0, 1.0)


class TestComparison:
    def test_forced_gap(self):
        v = check_comparison(lambda t, x: -x, lambda t, x: -x + 1.0, 1.0, 1.0, 10.0)
        assert v.holds
        gap = v.trajectory.states[:, 1] - v.trajectory.states[:, 0]
        assert_allclose(gap[-1], 1.0 - math.exp(-10.0), rtol=1e-6)

    def test_equal_problems(self):
        f = lambda t, x: -x + math.sin(t)  # noqa: E731
        v = check_comparison(f, f, 0.5, 0.5, 10.0)
        assert v.holds
        assert abs(v.max_gap_violation) <= v.tol

    def test_hypothesis_violation_reported(self):
        with pytest.raises(HypothesisViolated) as info:
            check_comparison(lambda t, x: -x + 1.0, lambda t, x: -x, 0.0, 0.0, 1.0)
        assert info.value.excess == pytest.approx(1.0)

    def test_initial_order_violation(self):
        with pytest.raises(HypothesisViolated):
            check_comparison(lambda t, x: -x, lambda t, x: -x, 1.0, 0.5, 1.0)

    @settings(max_examples=50, deadline=None, derandomize=True)
    @given(
        a=st.floats(-3.0, 3.0),
        c=st.floats(-2.0, 2.0),
        phi0=st.floats(-2.0, 2.0),
        lift=st.floats(0.0, 1.0),
    )
    def test_property(self, a, c, phi0, lift):
        f = lambda t, x: a * np.sin(t) - x  # noqa: E731
        g = lambda t, x: a * np.sin(t) - x + abs(c)  # noqa: E731
        assert check_comparison(f, g, phi0, phi0 + lift, 5.0).holds


def test_trajectory_csv_layout():
    traj = integrate(lambda t, x: -x, [1.0, 2.0], 0.0, 1.0, IntegratorOptions().with_samples([0.0, 1.0]))
    lines = traj.to_csv().splitlines()
    assert lines[0] == "t,u1,u2,norm"
    assert lines[1] == "0,1,2," + repr(math.sqrt(5.0))
    assert lines[-1] == "# status: Completed"
