"""Tanh-squashed diagonal Gaussian policy sampling."""

import numpy as np

from . import tape as T
from .errors import DimensionError

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)
_LOG2 = np.log(2.0)
# largest double below 1: tanh rounds to +-1.0 for |u| > ~19
_EDGE = np.nextafter(1.0, 0.0)


def _squash_correction(u):
    # log(1 - tanh(u)^2) = 2 * (log 2 - u - softplus(-2u)), stable for large |u|
    return 2.0 * (_LOG2 - u - T.softplus(-2.0 * u))


def tanh_gaussian_log_prob(mean, log_std, pre_tanh):
    """Per-row log density of ``tanh(u)`` where ``u ~ N(mean, exp(log_std)^2)``."""
    mean, pre_tanh = T.as_var(mean), T.as_var(pre_tanh)
    log_std = T.clip(log_std, LOG_STD_MIN, LOG_STD_MAX)
    z = (pre_tanh - mean) * T.exp(-log_std)
    gauss = -0.5 * T.square(z) - log_std - _HALF_LOG_2PI
    return T.sum_rows(gauss - _squash_correction(pre_tanh))


def gaussian_policy_sample(mean, log_std, rng: np.random.Generator, noise=None):
    """Reparameterised sample ``a = tanh(mean + std * xi)``.

    Returns ``(action, log_prob)`` as vars; ``log_prob`` has shape (B, 1) and
    includes the tanh change of variables. ``noise`` overrides the standard
    normal draw.
    """
    mean = T.as_var(mean)
    log_std = T.clip(log_std, LOG_STD_MIN, LOG_STD_MAX)
    if mean.value.shape != log_std.value.shape:
        raise DimensionError(f"mean {mean.value.shape} vs log_std {log_std.value.shape}")
    xi = rng.standard_normal(mean.value.shape) if noise is None else np.asarray(noise, float)
    u = mean + T.exp(log_std) * xi
    action = T.clip(T.tanh(u), -_EDGE, _EDGE)
    gauss = -0.5 * (xi * xi) - log_std - _HALF_LOG_2PI
    log_prob = T.sum_rows(gauss - _squash_correction(u))
    return action, log_prob


def squash_mean(mean):
    """Deterministic action for a pre-squash mean array."""
    return np.clip(np.tanh(mean), -_EDGE, _EDGE)
