"""Desk-scale environments: cart-pole swing-up, chain MDP, reward wrappers, toy regression."""

from .base import Env, StepResult, Wrapper
from .cartpole import (CartpoleParams, CartpoleState, CartpoleSwingup, cartpole_swingup_step,
                       mechanical_energy)
from .chain import (LEFT, RIGHT, ChainEnv, ChainMdp, bellman_backup, chain_step,
                    exhaustive_transitions, make_chain, one_hot, value_iteration)
from .toyreg import TRAIN_RANGE, RegressionDataset, toy_regression_make
from .wrappers import NoisyReward, SparseReward, noisy_reward_wrap, sparse_wrap

__all__ = [
    "CartpoleParams", "CartpoleState", "CartpoleSwingup", "ChainEnv", "ChainMdp", "Env", "LEFT",
    "NoisyReward", "RIGHT", "RegressionDataset", "SparseReward", "StepResult", "TRAIN_RANGE",
    "Wrapper", "bellman_backup", "cartpole_swingup_step", "chain_step", "exhaustive_transitions",
    "make_chain",
    "mechanical_energy", "noisy_reward_wrap", "one_hot", "sparse_wrap", "toy_regression_make",
    "value_iteration",
]
