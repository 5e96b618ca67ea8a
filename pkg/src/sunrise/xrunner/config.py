"""Experiment configuration: JSON documents validated into a :class:`RunConfig`."""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..diffcore.errors import ContractError
from ..ensemble import WeightScheme

ENVS = ("cartpole", "chain")
ALGORITHMS = ("sac", "dqn")
INFERENCE = ("ucb", "random")
LEARNERS = ("ensemble", "single")


@dataclass
class RunConfig:
    # environment and wrappers
    env: str = "cartpole"
    sparse: bool = False
    reward_noise: float = 0.0
    chain_states: int = 5
    chain_slip: float = 0.0
    chain_horizon: int = 20
    # learner
    algorithm: str = "sac"
    learner: str = "ensemble"
    inference: str = "ucb"
    scheme: str = "uniform"
    ensemble_n: int = 5
    weight_temp: float = 20.0
    ucb_lambda: float = 1.0
    mask_beta: float = 1.0
    # optimisation
    gamma: float = 0.99
    tau: float = 0.01
    hidden: list = field(default_factory=lambda: [64, 64])
    lr: float = 3e-4
    alpha_lr: float = 1e-4
    init_alpha: float = 0.1
    learn_alpha: bool = True
    batch_size: int = 128
    updates_per_step: int = 1
    buffer_capacity: int = 100_000
    # schedule
    total_steps: int = 10_000
    initial_steps: int = 1000
    eval_interval: int = 1000
    eval_episodes: int = 10
    seeds: list | None = None
    log_wall_clock: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        def need(ok, msg):
            if not ok:
                raise ContractError(f"invalid config: {msg}")

        need(self.env in ENVS, f"env must be one of {ENVS}, got {self.env!r}")
        need(self.algorithm in ALGORITHMS, f"algorithm must be one of {ALGORITHMS}")
        need(self.learner in LEARNERS, f"learner must be one of {LEARNERS}")
        need(self.inference in INFERENCE, f"inference must be one of {INFERENCE}")
        need(self.scheme in {s.value for s in WeightScheme},
             f"scheme must be one of {[s.value for s in WeightScheme]}")
        need((self.env == "chain") == (self.algorithm == "dqn"),
             "chain runs use dqn and cartpole runs use sac")
        need(self.ensemble_n >= 1, "ensemble_n must be >= 1")
        need(self.weight_temp > 0, "weight_temp must be > 0")
        need(self.ucb_lambda >= 0, "ucb_lambda must be >= 0")
        need(0 < self.mask_beta <= 1, "mask_beta must lie in (0, 1]")
        need(0 <= self.gamma < 1, "gamma must lie in [0, 1)")
        need(0 < self.tau <= 1, "tau must lie in (0, 1]")
        need(self.reward_noise >= 0, "reward_noise must be >= 0")
        need(0 <= self.chain_slip <= 1, "chain_slip must lie in [0, 1]")
        need(self.chain_states >= 2 and self.chain_horizon >= 1, "chain too small")
        need(all(int(h) > 0 for h in self.hidden), "hidden sizes must be positive")
        need(self.lr > 0 and self.alpha_lr > 0 and self.init_alpha > 0,
             "learning rates and init_alpha must be > 0")
        need(self.batch_size >= 1 and self.updates_per_step >= 0, "bad batch/update counts")
        need(self.buffer_capacity >= 1, "buffer_capacity must be >= 1")
        need(self.total_steps >= 0 and self.initial_steps >= 0, "step counts must be >= 0")
        need(self.eval_interval >= 1 and self.eval_episodes >= 1, "bad evaluation cadence")
        if self.seeds is not None:
            need(len(self.seeds) >= 1 and all(isinstance(s, int) and s >= 0 for s in self.seeds),
                 "seeds must be a non-empty list of non-negative integers")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ContractError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ContractError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    @property
    def members(self) -> int:
        return self.ensemble_n if self.learner == "ensemble" else 1


def resolve_seeds(cfg: RunConfig, flag_seed: int | None = None) -> list[int]:
    """Seed precedence: explicit flag, then the config's list, then ``SUNRISE_SEED``, then 0."""
    if flag_seed is not None:
        return [int(flag_seed)]
    if cfg.seeds:
        return list(cfg.seeds)
    env = os.environ.get("SUNRISE_SEED")
    if env is not None and env.strip():
        try:
            return [int(env)]
        except ValueError:
            raise ContractError(f"SUNRISE_SEED must be an integer, got {env!r}") from None
    return [0]


def write_config(cfg: RunConfig, path):
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
