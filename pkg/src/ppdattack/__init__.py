"""Evasion attacks against Bayesian predictive models.

A numpy/scipy library for studying how norm-bounded covariate perturbations
move a Bayesian model's posterior predictive distribution: stochastic
point-functional attacks, multilevel full-distribution attacks, exact
conjugate oracles for validating both, a one-shot sign baseline, gray-box
model-averaged attackers, and an experiment harness that produces security
evaluation curves and gradient diagnostics as CSV.
"""

from . import analytic, attacks, bayes, harness
from .exceptions import (
    DegenerateLikelihoodError,
    NonFiniteGradientError,
    SingularPrecisionError,
    UnsupportedModelError,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateLikelihoodError",
    "NonFiniteGradientError",
    "SingularPrecisionError",
    "UnsupportedModelError",
    "analytic",
    "attacks",
    "bayes",
    "harness",
]
