"""flowlab: a numerical laboratory for linear-interpolation normalizing flows.

Closed-form oracle velocity fields for Gaussian-mixture targets, flow-matching
training of a small ReLU velocity model, forward-Euler sampling, exact
empirical Wasserstein-2 evaluation, and verifiers for the regularity, moment,
tail, and approximation claims the constructions rest on.
"""

from .core import (
    CheckFailure,
    ConfigError,
    GaussianMixtureTarget,
    NumericError,
    TimeGrid,
    TrainingTriples,
    marginal_pdf_xt,
    rng,
    sample_interpolant,
    sample_target,
)

__version__ = "0.1.0"

__all__ = [
    "CheckFailure",
    "ConfigError",
    "GaussianMixtureTarget",
    "NumericError",
    "TimeGrid",
    "TrainingTriples",
    "marginal_pdf_xt",
    "rng",
    "sample_interpolant",
    "sample_target",
    "__version__",
]
