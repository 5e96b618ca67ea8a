from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass
class StepResult:
    """Outcome of one environment step.

    ``done`` ends the episode; ``terminal`` is true only when the episode ended
    in an absorbing state (not a time limit), which is what bootstrapped
    targets must mask.
    """

    next_observation: np.ndarray
    reward: float
    done: bool
    terminal: bool = False
    state: Any = field(default=None, repr=False)


class Env:
    obs_dim: int
    act_dim: int
    discrete: bool

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def step(self, action) -> StepResult:
        raise NotImplementedError

    @property
    def unwrapped(self) -> "Env":
        return self


class Wrapper(Env):
    def __init__(self, env: Env):
        self.env = env

    @property
    def obs_dim(self):
        return self.env.obs_dim

    @property
    def act_dim(self):
        return self.env.act_dim

    @property
    def discrete(self):
        return self.env.discrete

    @property
    def unwrapped(self):
        return self.env.unwrapped

    def reset(self, rng):
        return self.env.reset(rng)

    def step(self, action):
        return self.env.step(action)

    def __getattr__(self, name):
        return getattr(self.env, name)
