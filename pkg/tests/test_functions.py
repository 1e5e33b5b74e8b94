import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from ineqcert.errors import EvaluationDomain, InvalidParameter, MissingDerivative, NonPositiveMajorant
from ineqcert.functions import (
    Constant,
    CustomMajorant,
    Exponential,
    ExponentialMajorant,
    Polynomial,
    PowerDecay,
    PowerLaw,
    PowerMajorant,
    ScaledPower,
    ShiftedInversePowerMajorant,
    Sinusoid,
    Tabulated,
    TimeScaledPower,
    bound_at,
    finite_difference_rate,
    fmt,
)


@pytest.mark.parametrize("x, text", [(1.0, "1"), (0.1, "0.1"), (-2.0, "-2"), (1e-9, "1e-09"), (1 / 3, repr(1 / 3))])
def test_fmt_shortest_round_trip(x, text):
    assert fmt(x) == text
    assert float(fmt(x)) == x


def test_fmt_non_finite():
    assert fmt(math.inf) == "inf"
    assert fmt(math.nan) == "nan"


@pytest.mark.parametrize(
    "f, t, expected",
    [
        (Constant(3.0), 5.0, 3.0),
        (PowerDecay(2.0, 1.0), 1.0, 1.0),
        (PowerDecay(1.0, -1.0), 9.0, 10.0),
        (Exponential(2.0, 1.0), math.log(2.0), 1.0),
        (Polynomial((0.0, -1.0)), 4.0, -4.0),
        (Sinusoid(2.0, 1.0, 0.0), math.pi / 2, 2.0),
        (Tabulated((0.0, 1.0, 3.0), (0.0, 2.0, 6.0)), 2.0, 4.0),
        (PowerDecay(1.0, -1.0) + Constant(1.0), 1.0, 3.0),
        (Constant(2.0) * Exponential(1.0, 1.0), 0.0, 2.0),
    ],
)
def test_time_function_values(f, t, expected):
    assert_allclose(f(t), expected, rtol=1e-14)
    assert_allclose(f(np.array([t, t])), [expected, expected], rtol=1e-14)


@pytest.mark.parametrize(
    "f",
    [
        PowerDecay(1.5, 0.7),
        PowerDecay(1.0, -1.0),
        Exponential(2.0, 0.3),
        Polynomial((1.0, -2.0, 0.5)),
        Sinusoid(1.0, 2.0, 0.3),
        PowerDecay(1.0, 1.0) + Exponential(1.0, 1.0),
        PowerDecay(1.0, 1.0) * Exponential(1.0, 1.0),
    ],
)
def test_closed_form_derivatives_match_finite_differences(f):
    t = np.linspace(0.1, 5.0, 25)
    eps = 1e-6
    fd = (f(t + eps) - f(t - eps)) / (2 * eps)
    assert_allclose(f.derivative()(t), fd, rtol=1e-6, atol=1e-8)


def test_tabulated_rejects_out_of_range_and_bad_knots():
    f = Tabulated((0.0, 1.0), (1.0, 2.0))
    with pytest.raises(EvaluationDomain):
        f(1.5)
    with pytest.raises(InvalidParameter):
        Tabulated((0.0, 0.0), (1.0, 2.0))


def test_describe_strings():
    assert PowerDecay(1.0, -1.0).describe() == "(1+t)"
    assert Polynomial((0.0, -1.0)).describe() == "-t"
    assert Polynomial((1.0, -1.0, 2.0)).describe() == "1 - t + 2*t^2"


def test_divergence_flags():
    assert PowerDecay(1.0, -1.0).diverges()
    assert not PowerDecay(1.0, 1.0).diverges()
    assert Polynomial((1.0, 1.0)).diverges()
    assert not Polynomial((1.0, -1.0)).diverges()
    assert (PowerDecay(1.0, -1.0) + Constant(-5.0)).diverges()


def test_power_law_preconditions():
    with pytest.raises(InvalidParameter):
        PowerLaw(1.0, 1.0)
    with pytest.raises(InvalidParameter):
        PowerLaw(0.0, 2.0)


def test_power_law_lipschitz_estimate_close_to_exact():
    a = PowerLaw(2.0, 3.0)
    assert_allclose(a.lipschitz_estimate(1.0, 2.0), a.lipschitz_exact(1.0, 2.0), rtol=1e-2)


@pytest.mark.parametrize("alpha", [PowerLaw(1.0, 2.0), TimeScaledPower(0.5, 2.0, 3.0)])
def test_monotone_spot_check(alpha):
    assert alpha.monotone_in_g
    assert alpha.check_monotone(10.0, 5.0, seed=3)


def test_negative_scaled_power_is_not_monotone():
    alpha = ScaledPower(PowerDecay(-1.0, -2.0), 2.0)
    assert not alpha.check_monotone(10.0, 5.0, seed=1)
    assert_allclose(alpha(1.0, 0.5), -4.0 * 0.25)


@pytest.mark.parametrize(
    "mu, t, expected",
    [
        (PowerMajorant(1.0, 1.0), 0.0, 1.0),
        (CustomMajorant.from_function(PowerDecay(1.0, -1.0)), 9.0, 0.1),
        (ExponentialMajorant(2.0, 0.5), 2.0, 1.0 / (2.0 * math.e)),
        (ShiftedInversePowerMajorant(1.0, 1.0, 2.0), 0.0, 0.5),
    ],
)
def test_bound_at(mu, t, expected):
    assert_allclose(bound_at(mu, t), expected, rtol=1e-12)


def test_bound_at_rejects_nonpositive_majorant():
    mu = CustomMajorant.from_function(Polynomial((1.0, -1.0)))
    with pytest.raises(NonPositiveMajorant):
        bound_at(mu, 2.0)


def test_custom_majorant_needs_derivative():
    mu = CustomMajorant.from_function(Tabulated((0.0, 1.0), (1.0, 2.0)))
    assert_allclose(mu.value(0.5), 1.5)
    with pytest.raises(MissingDerivative):
        mu.rate(0.5)


@pytest.mark.parametrize(
    "mu",
    [ExponentialMajorant(2.0, 0.5), PowerMajorant(1.5, 0.7), ShiftedInversePowerMajorant(1.0, 2.0, 3.0)],
)
def test_family_derivatives_exact(mu):
    rng = np.random.default_rng(0)
    t = rng.uniform(0.0, 20.0, 100)
    assert_allclose(mu.rate(t), finite_difference_rate(mu, t), rtol=1e-6)


def test_majorant_parameter_validation():
    with pytest.raises(InvalidParameter):
        ExponentialMajorant(0.0, 1.0)
    with pytest.raises(InvalidParameter):
        ShiftedInversePowerMajorant(-1.0, 1.0, 1.0)


@settings(max_examples=100, deadline=None)
@given(
    lam=st.floats(0.1, 10.0),
    b=st.floats(-2.0, 2.0),
    t=st.floats(0.0, 20.0),
)
def test_exponential_log_rate_is_constant(lam, b, t):
    mu = ExponentialMajorant(lam, b)
    assert_allclose(mu.log_rate(t), b, rtol=0, atol=1e-15)
    assert_allclose(bound_at(mu, t), math.exp(-b * t) / lam, rtol=1e-12)
