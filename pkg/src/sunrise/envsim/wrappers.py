"""Reward-shaping wrappers: sparse swing-up and additive Gaussian reward noise."""

from dataclasses import replace

import numpy as np

from ..diffcore.errors import ContractError
from .base import Env, StepResult, Wrapper

SPARSE_COS_THRESHOLD = 0.95


class SparseReward(Wrapper):
    """Reward 1 when the pole is within ~18 degrees of upright, else 0."""

    def __init__(self, env: Env, threshold: float = SPARSE_COS_THRESHOLD):
        super().__init__(env)
        self.threshold = threshold

    def step(self, action) -> StepResult:
        res = self.env.step(action)
        return replace(res, reward=1.0 if self.env.pole_cosine() > self.threshold else 0.0)


def sparse_wrap(env: Env, threshold: float = SPARSE_COS_THRESHOLD) -> SparseReward:
    return SparseReward(env, threshold)


class NoisyReward(Wrapper):
    """Adds ``N(0, sigma^2)`` noise to training rewards.

    With ``evaluation=True`` the wrapper is bypassed and returns the underlying
    reward untouched.
    """

    def __init__(self, env: Env, sigma: float, rng: np.random.Generator, evaluation: bool = False):
        if sigma < 0:
            raise ContractError(f"sigma must be >= 0, got {sigma}")
        super().__init__(env)
        self.sigma = float(sigma)
        self.rng = rng
        self.evaluation = evaluation

    def step(self, action) -> StepResult:
        res = self.env.step(action)
        if self.evaluation or self.sigma == 0.0:
            return res
        return replace(res, reward=res.reward + self.sigma * float(self.rng.standard_normal()))


def noisy_reward_wrap(env: Env, sigma: float, rng: np.random.Generator,
                      evaluation: bool = False) -> NoisyReward:
    return NoisyReward(env, sigma, rng, evaluation)
