"""Single soft actor-critic agent: losses, temperature tuning, one update step."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..diffcore import (MlpParams, ParamVector, Tape, adam_step, gaussian_policy_sample,
                        mlp_forward)
from ..diffcore import tape as T
from ..diffcore.errors import DimensionError, NonFiniteError
from ..replay import Batch
from .common import target_sync


@dataclass
class SacSettings:
    hidden: tuple[int, ...] = (64, 64)
    lr: float = 3e-4
    betas: tuple[float, float] = (0.9, 0.999)
    alpha_lr: float = 1e-4
    alpha_betas: tuple[float, float] = (0.5, 0.999)
    init_alpha: float = 0.1
    learn_alpha: bool = True
    tau: float = 0.01
    target_entropy: float | None = None  # defaults to -act_dim


@dataclass(eq=False)
class SacAgent:
    critic: MlpParams
    critic_target: MlpParams
    actor: MlpParams
    log_alpha: ParamVector
    rng: np.random.Generator
    settings: SacSettings = field(default_factory=SacSettings)

    def __post_init__(self):
        if not self.critic.same_architecture(self.critic_target):
            raise DimensionError("critic and target critic architectures differ")
        if self.actor.out_dim % 2:
            raise DimensionError("actor must output mean and log_std halves")

    @classmethod
    def create(cls, obs_dim: int, act_dim: int, rng: np.random.Generator,
               settings: SacSettings | None = None) -> "SacAgent":
        settings = settings or SacSettings()
        hidden = tuple(settings.hidden)
        critic = MlpParams.init((obs_dim + act_dim, *hidden, 1), rng)
        actor = MlpParams.init((obs_dim, *hidden, 2 * act_dim), rng)
        log_alpha = ParamVector(np.array([np.log(settings.init_alpha)]))
        return cls(critic, critic.copy(), actor, log_alpha, rng, settings)

    @property
    def obs_dim(self) -> int:
        return self.actor.in_dim

    @property
    def act_dim(self) -> int:
        return self.actor.out_dim // 2

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha.theta[0]))

    @property
    def target_entropy(self) -> float:
        te = self.settings.target_entropy
        return -float(self.act_dim) if te is None else float(te)

    def policy(self, s, tape: Tape | None = None):
        """(mean, log_std) vars of the pre-squash Gaussian."""
        out = mlp_forward(self.actor, s, tape)
        d = self.act_dim
        return T.columns(out, 0, d), T.columns(out, d, 2 * d)

    def sample(self, s, rng: np.random.Generator | None = None):
        """Actions and log-probs as arrays, without recording gradients."""
        mean, log_std = self.policy(s)
        a, lp = gaussian_policy_sample(mean, log_std, rng or self.rng)
        return a.value, lp.value

    def mean_action(self, s) -> np.ndarray:
        """Pre-squash policy mean for a (B, obs_dim) batch."""
        return mlp_forward(self.actor, s)[:, :self.act_dim]

    def q(self, s, a, target: bool = False) -> np.ndarray:
        net = self.critic_target if target else self.critic
        return mlp_forward(net, np.concatenate([s, a], axis=1))


def soft_target(agent: SacAgent, batch: Batch, gamma: float, next_action, next_log_prob):
    """r + gamma * (1 - done) * (Q_target(s', a') - alpha * log pi(a'|s'))."""
    q_next = agent.q(batch.s_next, next_action, target=True)
    y = batch.r + gamma * (1.0 - batch.done) * (q_next - agent.alpha * next_log_prob)
    bad = np.flatnonzero(~np.isfinite(y[:, 0]))
    if bad.size:
        raise NonFiniteError(f"non-finite critic target at transition {int(bad[0])}")
    return y


def _coefficient(weights, masks):
    if weights is None and masks is None:
        return None
    if weights is None:
        return np.asarray(masks, dtype=np.float64).reshape(-1, 1)
    w = np.asarray(weights, dtype=np.float64).reshape(-1, 1)
    return w if masks is None else w * np.asarray(masks, dtype=np.float64).reshape(-1, 1)


def sac_critic_loss(agent: SacAgent, batch: Batch, gamma: float, weights=None,
                    tape: Tape | None = None, masks=None, next_sample=None):
    """Weighted soft Bellman residual, averaged over the batch.

    ``next_sample=(a', log_prob')`` supplies the next-state action; otherwise it
    is drawn from the current actor with the agent's generator. The target is
    a constant; only the live critic receives gradient.
    """
    if next_sample is None:
        next_sample = agent.sample(batch.s_next)
    y = soft_target(agent, batch, gamma, *next_sample)
    q = mlp_forward(agent.critic, np.concatenate([batch.s, batch.a], axis=1), tape)
    sq = T.square(T.as_var(q) - y)
    coef = _coefficient(weights, masks)
    if coef is not None:
        sq = sq * coef
    return T.mean(sq)


def actor_objective(agent: SacAgent, states, rng=None, tape: Tape | None = None, masks=None):
    """Policy loss mean(m * (alpha * log pi(a|s) - Q(s, a))) and the sampled log-probs."""
    mean, log_std = agent.policy(states, tape)
    a, log_prob = gaussian_policy_sample(mean, log_std, rng or agent.rng)
    q = mlp_forward(agent.critic, T.concat([states, a], axis=1), watch=False) \
        if a.tape is not None else agent.q(states, a.value)
    per_item = agent.alpha * log_prob - q
    if masks is not None:
        per_item = per_item * np.asarray(masks, dtype=np.float64).reshape(-1, 1)
    return T.mean(per_item), log_prob.value


def sac_actor_loss(agent: SacAgent, states, rng=None, tape: Tape | None = None, masks=None):
    return actor_objective(agent, states, rng, tape, masks)[0]


def alpha_update(agent: SacAgent, states=None, target_entropy: float | None = None,
                 lr: float | None = None, rng=None, log_prob=None, masks=None) -> float:
    """Adam step on log(alpha) for J = -log(alpha) * mean(m * (log pi + target_entropy)).

    Pass ``log_prob`` to reuse samples already drawn; otherwise actions are
    sampled at ``states``.
    """
    if target_entropy is None:
        target_entropy = agent.target_entropy
    if log_prob is None:
        _, log_prob = agent.sample(states, rng)
    term = np.asarray(log_prob).reshape(-1) + target_entropy
    if masks is not None:
        term = term * np.asarray(masks, dtype=np.float64).reshape(-1)
    grad = np.array([-(term.sum() / term.size)])
    s = agent.settings
    adam_step(agent.log_alpha, grad, s.alpha_lr if lr is None else lr, s.alpha_betas)
    return agent.alpha


def sac_update(agent: SacAgent, batch: Batch, gamma: float, weights=None, masks=None,
               next_sample=None) -> float:
    """Critic step, actor step, temperature step, then target sync.

    A member whose masks are all zero skips the optimizer steps entirely (its
    target still syncs). Returns the critic loss before the step.
    """
    s = agent.settings
    active = masks is None or np.any(np.asarray(masks) != 0.0)
    if not active:
        if next_sample is None:
            next_sample = agent.sample(batch.s_next)
        loss = float(sac_critic_loss(agent, batch, gamma, weights, None, masks, next_sample).value)
        target_sync(agent.critic, agent.critic_target, s.tau)
        return loss
    tape = Tape()
    loss = sac_critic_loss(agent, batch, gamma, weights, tape, masks, next_sample)
    adam_step(agent.critic, tape.backward(loss), s.lr, s.betas)

    tape = Tape()
    pi_loss, log_prob = actor_objective(agent, batch.s, None, tape, masks)
    adam_step(agent.actor, tape.backward(pi_loss), s.lr, s.betas)

    if s.learn_alpha:
        alpha_update(agent, log_prob=log_prob, masks=masks)
    target_sync(agent.critic, agent.critic_target, s.tau)
    return float(loss.value)
