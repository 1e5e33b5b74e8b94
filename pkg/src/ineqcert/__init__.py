"""Certified large-time bounds for nonlinear evolution problems via a scalar differential inequality."""
from .certcore import (
    CertificateReport,
    GridSpec,
    InequalityProblem,
    Verdict,
    check_trajectory_bound,
    verify_certificate,
)
from .discrete import DiscreteCertificate, DiscreteProblem, run_recursion, verify_discrete_certificate
from .functions import (
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
    TimeScaledPower,
)
from .odesim import EvolutionSystem, IntegratorOptions, Status, check_comparison, integrate

__version__ = "0.1.0"
