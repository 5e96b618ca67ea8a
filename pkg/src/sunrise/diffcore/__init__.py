"""Minimal float64 differentiable-computation engine."""

from . import kernels
from .errors import ContractError, DimensionError, NonFiniteError, SunriseError
from .gradcheck import analytic_gradients, finite_differences, grad_check, relative_error
from .mlp import MlpParams, ParamVector, adam_step, mlp_forward
from .policy import (LOG_STD_MAX, LOG_STD_MIN, gaussian_policy_sample, squash_mean,
                     tanh_gaussian_log_prob)
from .tape import Gradients, Tape, Var, as_var

BACKEND = kernels.BACKEND

__all__ = [
    "BACKEND", "ContractError", "DimensionError", "Gradients", "LOG_STD_MAX", "LOG_STD_MIN",
    "MlpParams", "NonFiniteError", "ParamVector", "SunriseError", "Tape", "Var",
    "adam_step", "analytic_gradients", "as_var", "finite_differences", "gaussian_policy_sample",
    "grad_check", "mlp_forward", "relative_error", "squash_mean", "tanh_gaussian_log_prob",
]
