"""Time functions, nonlinearities and majorant families.

Everything here evaluates on floats or numpy arrays. Time functions house
gamma(t), beta(t) and custom majorant cores; nonlinearities house alpha(t, g);
majorants are the positive C^1 functions mu(t) whose reciprocal bounds g(t).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import EvaluationDomain, InvalidParameter, MissingDerivative, NonPositiveMajorant


def fmt(x: float) -> str:
    """Shortest round-trip decimal representation of a float."""
    x = float(x)
    if not math.isfinite(x):
        return repr(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _as_float_array(t):
    return np.asarray(t, dtype=float)


def _shape_like(t, value):
    # scalar in, scalar out
    if np.ndim(t) == 0:
        return float(value)
    return np.broadcast_to(np.asarray(value, dtype=float), np.shape(t)).copy()


# ---------------------------------------------------------------------------
# time functions


class TimeFunction:
    """A real-valued function of time t >= 0."""

    def __call__(self, t):
        raise NotImplementedError

    def derivative(self) -> Optional["TimeFunction"]:
        """Closed-form derivative, or None when the kind has none."""
        return None

    def is_zero(self) -> bool:
        return False

    def diverges(self) -> bool:
        """True when f(t) -> +inf as t -> inf is evident from the closed form."""
        return False

    def bounded_below(self) -> bool:
        return False

    def describe(self) -> str:
        raise NotImplementedError

    def __add__(self, other):
        return Sum((self, other))

    def __mul__(self, other):
        return Product((self, other))


@dataclass(frozen=True)
class Constant(TimeFunction):
    c: float

    def __call__(self, t):
        return _shape_like(t, self.c)

    def derivative(self):
        return Constant(0.0)

    def is_zero(self):
        return self.c == 0

    def bounded_below(self):
        return True

    def describe(self):
        return fmt(self.c)


@dataclass(frozen=True)
class PowerDecay(TimeFunction):
    """c / (1 + t)^q. A negative q gives polynomial growth."""

    c: float
    q: float

    def __call__(self, t):
        ta = _as_float_array(t)
        out = self.c * np.power(1.0 + ta, -self.q)
        return float(out) if np.ndim(t) == 0 else out

    def derivative(self):
        if self.q == 0 or self.c == 0:
            return Constant(0.0)
        return PowerDecay(-self.q * self.c, self.q + 1.0)

    def is_zero(self):
        return self.c == 0

    def diverges(self):
        return self.c > 0 and self.q < 0

    def bounded_below(self):
        return self.c >= 0 or self.q >= 0

    def describe(self):
        if self.q == 0:
            return fmt(self.c)
        if self.q == -1:
            base = "(1+t)"
        else:
            base = f"(1+t)^{fmt(-self.q)}"
        if self.c == 1:
            return base
        return f"{fmt(self.c)}*{base}"


@dataclass(frozen=True)
class Exponential(TimeFunction):
    """c * exp(-k t)."""

    c: float
    k: float

    def __call__(self, t):
        ta = _as_float_array(t)
        out = self.c * np.exp(-self.k * ta)
        return float(out) if np.ndim(t) == 0 else out

    def derivative(self):
        if self.k == 0 or self.c == 0:
            return Constant(0.0)
        return Exponential(-self.k * self.c, self.k)

    def is_zero(self):
        return self.c == 0

    def diverges(self):
        return self.c > 0 and self.k < 0

    def bounded_below(self):
        return self.c >= 0 or self.k >= 0

    def describe(self):
        return f"{fmt(self.c)}*exp({fmt(-self.k)}*t)"


@dataclass(frozen=True)
class Tabulated(TimeFunction):
    """Piecewise-linear interpolation through (knots, values)."""

    knots: tuple
    values: tuple

    def __post_init__(self):
        knots = tuple(float(k) for k in self.knots)
        values = tuple(float(v) for v in self.values)
        if len(knots) != len(values) or len(knots) < 2:
            raise InvalidParameter("Tabulated needs >= 2 knots and one value per knot")
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise InvalidParameter("Tabulated knots must be strictly increasing")
        if not all(math.isfinite(v) for v in values):
            raise InvalidParameter("Tabulated values must be finite")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        ta = _as_float_array(t)
        lo, hi = self.knots[0], self.knots[-1]
        if np.any(ta < lo) or np.any(ta > hi):
            raise EvaluationDomain(f"Tabulated function evaluated outside [{lo}, {hi}]")
        out = np.interp(ta, self.knots, self.values)
        return float(out) if np.ndim(t) == 0 else out

    def bounded_below(self):
        return True

    def describe(self):
        return f"tabulated[{len(self.knots)} knots on {fmt(self.knots[0])}..{fmt(self.knots[-1])}]"


@dataclass(frozen=True)
class Sum(TimeFunction):
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def __call__(self, t):
        out = sum(_as_float_array(term(t)) for term in self.terms)
        return float(out) if np.ndim(t) == 0 else np.asarray(out, dtype=float)

    def derivative(self):
        parts = [term.derivative() for term in self.terms]
        if any(p is None for p in parts):
            return None
        return Sum(tuple(parts))

    def is_zero(self):
        return all(term.is_zero() for term in self.terms)

    def diverges(self):
        return any(term.diverges() for term in self.terms) and all(
            term.bounded_below() for term in self.terms
        )

    def bounded_below(self):
        return all(term.bounded_below() for term in self.terms)

    def describe(self):
        return " + ".join(term.describe() for term in self.terms)


@dataclass(frozen=True)
class Product(TimeFunction):
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def __call__(self, t):
        out = np.ones(np.shape(t))
        for term in self.terms:
            out = out * _as_float_array(term(t))
        return float(out) if np.ndim(t) == 0 else out

    def derivative(self):
        parts = []
        for i, term in enumerate(self.terms):
            d = term.derivative()
            if d is None:
                return None
            others = self.terms[:i] + self.terms[i + 1:]
            parts.append(Product((d,) + others))
        return Sum(tuple(parts))

    def is_zero(self):
        return any(term.is_zero() for term in self.terms)

    def describe(self):
        return " * ".join(f"({term.describe()})" for term in self.terms)


@dataclass(frozen=True)
class Sinusoid(TimeFunction):
    """a * sin(omega t + phase)."""

    a: float
    omega: float = 1.0
    phase: float = 0.0

    def __call__(self, t):
        out = self.a * np.sin(self.omega * np.asarray(t, dtype=float) + self.phase)
        return float(out) if np.ndim(t) == 0 else out

    def derivative(self):
        return Sinusoid(self.a * self.omega, self.omega, self.phase + math.pi / 2)

    def is_zero(self):
        return self.a == 0

    def bounded_below(self):
        return True

    def describe(self):
        return f"{fmt(self.a)}*sin({fmt(self.omega)}*t + {fmt(self.phase)})"


@dataclass(frozen=True)
class Polynomial(TimeFunction):
    """sum_i coeffs[i] * t^i."""

    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            raise InvalidParameter("Polynomial needs at least one coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    def _degree(self):
        nonzero = [i for i, c in enumerate(self.coeffs) if c != 0]
        return nonzero[-1] if nonzero else -1

    def __call__(self, t):
        out = np.polynomial.polynomial.polyval(_as_float_array(t), self.coeffs)
        return float(out) if np.ndim(t) == 0 else out

    def derivative(self):
        if len(self.coeffs) == 1:
            return Polynomial((0.0,))
        return Polynomial(tuple(i * c for i, c in enumerate(self.coeffs) if i > 0))

    def is_zero(self):
        return self._degree() < 0

    def diverges(self):
        deg = self._degree()
        return deg >= 1 and self.coeffs[deg] > 0

    def bounded_below(self):
        deg = self._degree()
        return deg <= 0 or self.coeffs[deg] > 0

    def describe(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            if i == 0:
                text = fmt(c)
            elif c == 1:
                text = mono
            elif c == -1:
                text = "-" + mono
            else:
                text = f"{fmt(c)}*{mono}"
            parts.append(text)
        if not parts:
            return "0"
        return " + ".join(parts).replace("+ -", "- ")


ZERO = Constant(0.0)


# ---------------------------------------------------------------------------
# nonlinearities


def _try_vectorized(func, t, g):
    try:
        out = func(t, g)
        out = np.asarray(out, dtype=float)
        if out.shape == np.broadcast(np.asarray(t), np.asarray(g)).shape:
            return out
    except Exception:
        pass
    tb, gb = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(g, dtype=float))
    flat = [float(func(float(a), float(b))) for a, b in zip(tb.ravel(), gb.ravel())]
    return np.asarray(flat, dtype=float).reshape(tb.shape)


class Nonlinearity:
    """alpha(t, g), defined for g >= 0."""

    monotone_in_g: bool = False

    def __call__(self, t, g):
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def lipschitz_estimate(self, T: float, M: float, n_t: int = 51, n_g: int = 401) -> float:
        """Estimate L(T, M) by finite differences on a [0, T] x [0, M] grid."""
        if T < 0 or M <= 0:
            raise InvalidParameter("lipschitz_estimate needs T >= 0 and M > 0")
        ts = np.linspace(0.0, T, n_t)[:, None]
        gs = np.linspace(0.0, M, n_g)[None, :]
        vals = np.asarray(self(np.broadcast_to(ts, (n_t, n_g)), np.broadcast_to(gs, (n_t, n_g))))
        slopes = np.abs(np.diff(vals, axis=1)) / (M / (n_g - 1))
        return float(np.max(slopes))

    def check_monotone(self, T: float, M: float, n: int = 1000, seed: int = 0) -> bool:
        """Spot-check alpha(t, g) >= alpha(t, h) for random g >= h >= 0."""
        rng = np.random.default_rng(seed)
        t = rng.uniform(0.0, T, n)
        a = rng.uniform(0.0, M, n)
        b = rng.uniform(0.0, M, n)
        g, h = np.maximum(a, b), np.minimum(a, b)
        return bool(np.all(np.asarray(self(t, g)) >= np.asarray(self(t, h))))


@dataclass(frozen=True)
class PowerLaw(Nonlinearity):
    """alpha(t, g) = c0 * g^p with p > 1, c0 > 0."""

    c0: float
    p: float
    monotone_in_g: bool = field(default=True, init=False)

    def __post_init__(self):
        if not self.p > 1:
            raise InvalidParameter(f"PowerLaw requires p > 1, got p={self.p}")
        if not self.c0 > 0:
            raise InvalidParameter(f"PowerLaw requires c0 > 0, got c0={self.c0}")

    def coefficient(self, t):
        return _shape_like(t, self.c0)

    def __call__(self, t, g):
        # alpha is only defined for g >= 0; |g| extends it evenly so the
        # comparison ODE stays evaluable if phi dips below zero
        out = self.c0 * np.power(np.abs(np.asarray(g, dtype=float)), self.p)
        out = np.broadcast_to(out, np.broadcast(np.asarray(t), np.asarray(g)).shape)
        return float(out) if out.ndim == 0 else np.array(out)

    def lipschitz_exact(self, T: float, M: float) -> float:
        return self.c0 * self.p * M ** (self.p - 1)

    def describe(self):
        return f"{fmt(self.c0)}*g^{fmt(self.p)}"


@dataclass(frozen=True)
class TimeScaledPower(Nonlinearity):
    """alpha(t, g) = c2 * (1 + t)^(-m2) * g^p."""

    c2: float
    m2: float
    p: float
    monotone_in_g: bool = field(default=True, init=False)

    def __post_init__(self):
        if not self.p > 1:
            raise InvalidParameter(f"TimeScaledPower requires p > 1, got p={self.p}")
        if not self.c2 > 0:
            raise InvalidParameter(f"TimeScaledPower requires c2 > 0, got c2={self.c2}")

    def coefficient(self, t):
        out = self.c2 * np.power(1.0 + np.asarray(t, dtype=float), -self.m2)
        return float(out) if np.ndim(t) == 0 else out

    def __call__(self, t, g):
        out = self.coefficient(np.asarray(t, dtype=float)) * np.power(
            np.abs(np.asarray(g, dtype=float)), self.p
        )
        return float(out) if np.ndim(out) == 0 else out

    def describe(self):
        return f"{fmt(self.c2)}*(1+t)^{fmt(-self.m2)}*g^{fmt(self.p)}"


@dataclass(frozen=True)
class ScaledPower(Nonlinearity):
    """alpha(t, g) = coefficient(t) * g^p for an arbitrary time function.

    The coefficient may be negative (a damping nonlinearity), so monotonicity
    in g is declared by the caller rather than assumed.
    """

    coefficient_fn: TimeFunction
    p: float
    monotone_in_g: bool = False

    def __post_init__(self):
        if not self.p > 0:
            raise InvalidParameter(f"ScaledPower requires p > 0, got p={self.p}")

    def coefficient(self, t):
        return self.coefficient_fn(t)

    def __call__(self, t, g):
        out = np.asarray(self.coefficient_fn(np.asarray(t, dtype=float))) * np.power(
            np.abs(np.asarray(g, dtype=float)), self.p
        )
        return float(out) if np.ndim(out) == 0 else out

    def describe(self):
        return f"({self.coefficient_fn.describe()})*g^{fmt(self.p)}"


@dataclass(frozen=True)
class CustomNonlinearity(Nonlinearity):
    func: Callable
    monotone_in_g: bool = False
    name: str = "custom"

    def __call__(self, t, g):
        out = _try_vectorized(self.func, t, g)
        return float(out) if out.ndim == 0 else out

    def describe(self):
        return self.name


@dataclass(frozen=True)
class ZeroNonlinearity(Nonlinearity):
    monotone_in_g: bool = field(default=True, init=False)

    def coefficient(self, t):
        return _shape_like(t, 0.0)

    def __call__(self, t, g):
        shape = np.broadcast(np.asarray(t), np.asarray(g)).shape
        return 0.0 if shape == () else np.zeros(shape)

    def describe(self):
        return "0"


ZERO_ALPHA = ZeroNonlinearity()


# ---------------------------------------------------------------------------
# majorants


def _wrap_reciprocal(formula: str) -> str:
    if formula.startswith("(") and formula.endswith(")") and formula.count("(") == 1:
        return "1/" + formula
    return f"1/({formula})"


class Majorant:
    """A positive C^1 function mu(t); 1/mu(t) is the certified bound on g(t)."""

    family: str = "custom"

    def value(self, t):
        raise NotImplementedError

    def rate(self, t):
        """Time derivative of mu."""
        raise NotImplementedError

    def log_rate(self, t):
        """mu'(t)/mu(t), in closed form where the family allows it."""
        return np.asarray(self.rate(t)) / np.asarray(self.value(t))

    def tends_to_infinity(self) -> bool:
        return False

    def formula(self) -> str:
        raise NotImplementedError

    def bound_formula(self) -> str:
        return _wrap_reciprocal(self.formula())

    def params(self) -> dict:
        return {}


@dataclass(frozen=True)
class ExponentialMajorant(Majorant):
    """mu(t) = lam * exp(b t)."""

    lam: float
    b: float
    family: str = field(default="exponential", init=False)

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidParameter(f"majorant parameter lambda must be > 0, got {self.lam}")

    def value(self, t):
        out = self.lam * np.exp(self.b * np.asarray(t, dtype=float))
        return float(out) if np.ndim(t) == 0 else out

    def rate(self, t):
        return self.b * self.value(t)

    def log_rate(self, t):
        return _shape_like(t, self.b)

    def tends_to_infinity(self):
        return self.b > 0

    def formula(self):
        core = f"exp({fmt(self.b)}*t)"
        return core if self.lam == 1 else f"{fmt(self.lam)}*{core}"

    def params(self):
        return {"lambda": self.lam, "b": self.b}


@dataclass(frozen=True)
class PowerMajorant(Majorant):
    """mu(t) = lam * (1 + t)^nu."""

    lam: float
    nu: float
    family: str = field(default="power", init=False)

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidParameter(f"majorant parameter lambda must be > 0, got {self.lam}")

    def value(self, t):
        out = self.lam * np.power(1.0 + np.asarray(t, dtype=float), self.nu)
        return float(out) if np.ndim(t) == 0 else out

    def rate(self, t):
        out = self.nu * self.lam * np.power(1.0 + np.asarray(t, dtype=float), self.nu - 1.0)
        return float(out) if np.ndim(t) == 0 else out

    def log_rate(self, t):
        out = self.nu / (1.0 + np.asarray(t, dtype=float))
        return float(out) if np.ndim(t) == 0 else out

    def tends_to_infinity(self):
        return self.nu > 0

    def formula(self):
        core = "(1+t)" if self.nu == 1 else f"(1+t)^{fmt(self.nu)}"
        return core if self.lam == 1 else f"{fmt(self.lam)}*{core}"

    def params(self):
        return {"lambda": self.lam, "nu": self.nu}


@dataclass(frozen=True)
class ShiftedInversePowerMajorant(Majorant):
    """mu(t) = d + lam * (1 + t)^(-n)."""

    d: float
    lam: float
    n: float
    family: str = field(default="shifted_inverse_power", init=False)

    def __post_init__(self):
        if not self.d > 0 or not self.lam > 0:
            raise InvalidParameter(f"majorant parameters d, lambda must be > 0, got d={self.d}, lambda={self.lam}")

    def value(self, t):
        out = self.d + self.lam * np.power(1.0 + np.asarray(t, dtype=float), -self.n)
        return float(out) if np.ndim(t) == 0 else out

    def rate(self, t):
        out = -self.n * self.lam * np.power(1.0 + np.asarray(t, dtype=float), -self.n - 1.0)
        return float(out) if np.ndim(t) == 0 else out

    def formula(self):
        return f"{fmt(self.d)} + {fmt(self.lam)}*(1+t)^{fmt(-self.n)}"

    def params(self):
        return {"d": self.d, "lambda": self.lam, "n": self.n}


@dataclass(frozen=True)
class CustomMajorant(Majorant):
    core: TimeFunction
    derivative: Optional[TimeFunction] = None
    family: str = field(default="custom", init=False)

    @classmethod
    def from_function(cls, core: TimeFunction) -> "CustomMajorant":
        """Build a custom majorant, taking the derivative from the core's closed form."""
        return cls(core, core.derivative())

    def _require_derivative(self):
        if self.derivative is None:
            raise MissingDerivative("custom majorant has no derivative")
        return self.derivative

    def value(self, t):
        return self.core(t)

    def rate(self, t):
        return self._require_derivative()(t)

    def tends_to_infinity(self):
        return self.core.diverges()

    def formula(self):
        return self.core.describe()

    def params(self):
        return {"core": self.core.describe()}


def bound_at(mu: Majorant, t):
    """Certified upper bound 1/mu(t) on g(t)."""
    if np.any(np.asarray(t) < 0):
        raise InvalidParameter("bound_at requires t >= 0")
    value = np.asarray(mu.value(t), dtype=float)
    if np.any(~(value > 0)):
        raise NonPositiveMajorant(f"mu(t) <= 0 at t={t}")
    out = 1.0 / value
    return float(out) if out.ndim == 0 else out


def finite_difference_rate(mu: Majorant, t: Sequence[float], rel_step: float = 1e-5):
    """Central finite-difference estimate of mu'(t); used to cross-check closed forms."""
    t = np.asarray(t, dtype=float)
    h = rel_step * np.maximum(1.0, np.abs(t))
    return (np.asarray(mu.value(t + h)) - np.asarray(mu.value(t - h))) / (2 * h)
