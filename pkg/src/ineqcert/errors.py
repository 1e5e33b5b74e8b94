"""Exception types shared across the package."""


class IneqCertError(Exception):
    """Base class for all errors raised by ineqcert."""


class NonPositiveMajorant(IneqCertError):
    """A majorant evaluated to a value <= 0."""


class MissingDerivative(IneqCertError):
    """A custom majorant was supplied without a derivative."""


class EvaluationDomain(IneqCertError):
    """A time function was evaluated outside the range where it is defined."""


class InvalidParameter(IneqCertError):
    """A constructor or operation received parameters violating its preconditions."""


class EmptyTrajectory(IneqCertError):
    pass


class DimensionMismatch(IneqCertError):
    pass


class PastBlowup(IneqCertError):
    """Closed-form solution requested at or after the blow-up time."""


class HypothesisViolated(IneqCertError):
    """Sampled right-hand sides violate f(t, x) <= g(t, x)."""

    def __init__(self, message, t=None, x=None, excess=None):
        super().__init__(message)
        self.t = t
        self.x = x
        self.excess = excess


class StepConstraint(IneqCertError):
    """Some h_n * gamma_n lies outside (0, 1)."""


class NegativeAlpha(IneqCertError):
    pass


class LengthMismatch(IneqCertError):
    pass


class NonPositiveMu(IneqCertError):
    pass


class UnknownParameter(IneqCertError):
    pass


class ConfigError(IneqCertError):
    """Scenario configuration could not be parsed or validated."""


class BadEpsilon(InvalidParameter):
    """Rate sacrifice epsilon outside its admissible open interval."""


class BadExponent(InvalidParameter):
    """Nonlinearity exponent p <= 1."""


class BadRates(InvalidParameter):
    """Rates violate 0 < k < gamma and kprime > k."""
