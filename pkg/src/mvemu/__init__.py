"""Multivariate Bayesian emulation of computer simulators.

Covariance-separable Gaussian-process and lightweight (linear-model)
emulators with conjugate matrix-normal-inverse-Wishart posteriors, adequacy
diagnostics, Bayesian mean-function selection, reference-distribution
variable screening and variance-based sensitivity analysis.
"""

__version__ = "0.1.0"

from .data import Dataset, RunManifest, load_dataset
from .emulator import (FitOptions, FittedEmulator, PredictiveDistribution, PriorSpec,
                       fit, log_marginal_posterior_r, posterior_update)
from .kernel import (CorrelationConfig, Variable, VariableSchema, build_cross,
                     build_row_scale, correlation, lightweight_config)
from .meanfn import (MeanFunction, ModelSpace, Term, expand, intercept_only,
                     linear_model, maximal_model, neighbours)

__all__ = [
    "__version__",
    "Dataset", "RunManifest", "load_dataset",
    "FitOptions", "FittedEmulator", "PredictiveDistribution", "PriorSpec",
    "fit", "log_marginal_posterior_r", "posterior_update",
    "CorrelationConfig", "Variable", "VariableSchema", "build_cross",
    "build_row_scale", "correlation", "lightweight_config",
    "MeanFunction", "ModelSpace", "Term", "expand", "intercept_only",
    "linear_model", "maximal_model", "neighbours",
]
