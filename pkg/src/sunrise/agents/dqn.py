"""Single deep Q-learning agent over a finite action set."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..diffcore import MlpParams, Tape, adam_step, mlp_forward
from ..diffcore import tape as T
from ..diffcore.errors import DimensionError, NonFiniteError
from ..replay import Batch
from .common import target_sync
from .sac import _coefficient


@dataclass
class DqnSettings:
    hidden: tuple[int, ...] = (64, 64)
    lr: float = 3e-4
    betas: tuple[float, float] = (0.9, 0.999)
    tau: float = 0.01


@dataclass(eq=False)
class DqnAgent:
    q: MlpParams
    q_target: MlpParams
    rng: np.random.Generator
    settings: DqnSettings = field(default_factory=DqnSettings)

    def __post_init__(self):
        if not self.q.same_architecture(self.q_target):
            raise DimensionError("live and target Q architectures differ")

    @classmethod
    def create(cls, obs_dim: int, n_actions: int, rng: np.random.Generator,
               settings: DqnSettings | None = None) -> "DqnAgent":
        settings = settings or DqnSettings()
        q = MlpParams.init((obs_dim, *settings.hidden, n_actions), rng)
        return cls(q, q.copy(), rng, settings)

    @property
    def n_actions(self) -> int:
        return self.q.out_dim

    def values(self, s, target: bool = False) -> np.ndarray:
        return mlp_forward(self.q_target if target else self.q, s)

    def greedy(self, s) -> np.ndarray:
        return np.argmax(self.values(s), axis=1)


def dqn_target(agent: DqnAgent, batch: Batch, gamma: float) -> np.ndarray:
    """r + gamma * (1 - done) * max_a Q_target(s', a)."""
    best = agent.values(batch.s_next, target=True).max(axis=1, keepdims=True)
    y = batch.r + gamma * (1.0 - batch.done) * best
    bad = np.flatnonzero(~np.isfinite(y[:, 0]))
    if bad.size:
        raise NonFiniteError(f"non-finite Q target at transition {int(bad[0])}")
    return y


def dqn_loss(agent: DqnAgent, batch: Batch, gamma: float, weights=None,
             tape: Tape | None = None, masks=None):
    """Weighted squared TD residual on the taken actions, batch-averaged."""
    actions = np.asarray(batch.a).reshape(-1)
    if actions.dtype.kind not in "iu":
        raise IndexError("discrete actions must be integer indices")
    if actions.size and (actions.min() < 0 or actions.max() >= agent.n_actions):
        bad = int(np.flatnonzero((actions < 0) | (actions >= agent.n_actions))[0])
        raise IndexError(f"action {int(actions[bad])} at transition {bad} outside "
                         f"[0, {agent.n_actions})")
    y = dqn_target(agent, batch, gamma)
    q = T.pick(mlp_forward(agent.q, batch.s, tape), actions)
    sq = T.square(q - y)
    coef = _coefficient(weights, masks)
    if coef is not None:
        sq = sq * coef
    return T.mean(sq)


def dqn_update(agent: DqnAgent, batch: Batch, gamma: float, weights=None, masks=None) -> float:
    """One Adam step on the TD loss followed by target sync; returns the loss."""
    s = agent.settings
    if masks is not None and not np.any(np.asarray(masks) != 0.0):
        loss = float(dqn_loss(agent, batch, gamma, weights, None, masks).value)
    else:
        tape = Tape()
        node = dqn_loss(agent, batch, gamma, weights, tape, masks)
        adam_step(agent.q, tape.backward(node), s.lr, s.betas)
        loss = float(node.value)
    target_sync(agent.q, agent.q_target, s.tau)
    return loss
