"""Ensemble statistics and backup-weighting rules."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit


class WeightScheme(str, Enum):
    UNIFORM = "uniform"
    RANDOM = "random"  # U[0.5, 1.0] per item
    ENSEMBLE_STD = "ensemble_std"


@dataclass(frozen=True)
class QStats:
    mean: np.ndarray
    std: np.ndarray


def q_stats(values) -> QStats:
    """Mean and population std over axis 0 (the member axis).

    Values are sorted along the member axis and centred on the smallest one
    first, so the result is exactly invariant to member order and identical
    members give exactly zero spread.
    """
    v = np.sort(np.asarray(values, dtype=np.float64), axis=0)
    base = v[:1]
    d = v - base
    d_mean = d.mean(axis=0)
    std = np.sqrt(np.mean(np.square(d - d_mean), axis=0))
    return QStats(base[0] + d_mean, std)


def confidence_weight(std, temperature):
    """sigmoid(-std * T) + 0.5, which lies in [0.5, 1.0] and is 1 at zero spread.

    ``std`` and ``temperature`` broadcast against each other.
    """
    temperature = np.asarray(temperature, dtype=np.float64)
    if not np.all(temperature > 0):
        raise ValueError(f"temperature must be positive, got {temperature}")
    std = np.asarray(std, dtype=np.float64)
    if np.any(std < 0):
        raise ValueError("std must be non-negative")
    w = expit(-std * temperature) + 0.5
    return float(w) if w.ndim == 0 else w


def random_weights(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.5, 1.0, n)
