"""Cubic toy-regression data with heavy observation noise."""

from dataclasses import dataclass

import numpy as np

TRAIN_RANGE = (-4.0, 4.0)


@dataclass
class RegressionDataset:
    x: np.ndarray
    y: np.ndarray

    def __len__(self):
        return len(self.x)


def toy_regression_make(rng: np.random.Generator | None = None, n: int = 20,
                        noise_std: float = 3.0,
                        x_range: tuple[float, float] = TRAIN_RANGE) -> RegressionDataset:
    """Draw ``y = x^3 + eps`` with ``x ~ U(x_range)`` and ``eps ~ N(0, noise_std^2)``.

    ``noise_std=0`` with ``rng=None`` gives an evenly spaced noiseless set.
    """
    if rng is None:
        if noise_std:
            raise ValueError("a generator is required for noisy data")
        x = np.linspace(*x_range, n)
        return RegressionDataset(x, x ** 3)
    x = rng.uniform(*x_range, size=n)
    eps = rng.normal(0.0, noise_std, size=n) if noise_std else np.zeros(n)
    return RegressionDataset(x, x ** 3 + eps)
