"""N-member ensembles with bootstrap-masked, confidence-weighted updates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..agents import DqnAgent, DqnSettings, SacAgent, SacSettings, dqn_update, sac_update
from ..diffcore.errors import ContractError, SunriseError
from ..replay import Batch
from ..seeding import member_rngs
from .weights import QStats, WeightScheme, confidence_weight, q_stats, random_weights


@dataclass(eq=False)
class EnsembleAgent:
    """Independently initialised members, each with its own target network."""

    members: list
    temperature: float = 20.0
    ucb_lambda: float = 1.0
    beta: float = 1.0
    scheme: WeightScheme = WeightScheme.UNIFORM
    weight_rng: np.random.Generator | None = None
    discrete: bool = field(init=False)

    def __post_init__(self):
        if len(self.members) < 1:
            raise ContractError("an ensemble needs at least one member")
        if not self.temperature > 0:
            raise ContractError(f"temperature must be positive, got {self.temperature}")
        if self.ucb_lambda < 0:
            raise ContractError(f"ucb_lambda must be non-negative, got {self.ucb_lambda}")
        if not 0.0 < self.beta <= 1.0:
            raise ContractError(f"beta must lie in (0, 1], got {self.beta}")
        self.scheme = WeightScheme(self.scheme)
        kinds = {type(m) for m in self.members}
        if len(kinds) != 1 or not kinds <= {SacAgent, DqnAgent}:
            raise ContractError("members must all be SacAgent or all DqnAgent")
        self.discrete = kinds == {DqnAgent}
        if self.scheme is WeightScheme.RANDOM and self.weight_rng is None:
            raise ContractError("random weighting needs weight_rng")

    @property
    def n(self) -> int:
        return len(self.members)

    @classmethod
    def create_sac(cls, obs_dim: int, act_dim: int, n: int, seed: int,
                   settings: SacSettings | None = None, **kw) -> "EnsembleAgent":
        members = [SacAgent.create(obs_dim, act_dim, rng, settings) for rng in member_rngs(seed, n)]
        return cls(members, **kw)

    @classmethod
    def create_dqn(cls, obs_dim: int, n_actions: int, n: int, seed: int,
                   settings: DqnSettings | None = None, **kw) -> "EnsembleAgent":
        members = [DqnAgent.create(obs_dim, n_actions, rng, settings)
                   for rng in member_rngs(seed, n)]
        return cls(members, **kw)


def ensemble_q_stats(members, s, a=None, use_target: bool = False) -> QStats:
    """Mean and population std of member Q-values.

    For SAC members ``a`` is a (B, act_dim) action batch and the stats are
    (B, 1); for DQN members the stats cover every action, (B, n_actions).
    """
    if isinstance(members, EnsembleAgent):
        members = members.members
    s = np.atleast_2d(np.asarray(s, dtype=np.float64))
    if isinstance(members[0], DqnAgent):
        vals = [m.values(s, target=use_target) for m in members]
    else:
        a = np.atleast_2d(np.asarray(a, dtype=np.float64))
        vals = [m.q(s, a, target=use_target) for m in members]
    return q_stats(np.stack(vals))


@dataclass
class UpdateReport:
    losses: list
    mean_weight: float
    mean_q_std: float


def _target_spread_continuous(ens: EnsembleAgent, s_next, next_actions):
    """std over target critics at (s', a'_i) for every member i: shape (N, B)."""
    n, B = ens.n, s_next.shape[0]
    x_s = np.tile(s_next, (n, 1))
    x_a = np.concatenate(next_actions, axis=0)
    vals = np.stack([m.q(x_s, x_a, target=True)[:, 0] for m in ens.members])  # (N_target, N*B)
    return q_stats(vals).std.reshape(n, B)


def _member_weights(ens: EnsembleAgent, batch: Batch, next_samples):
    """Per-member (B,) backup weights plus the q-std used, or None under uniform."""
    n, B = ens.n, len(batch)
    if ens.scheme is WeightScheme.UNIFORM:
        return [None] * n, 1.0, 0.0
    if ens.scheme is WeightScheme.RANDOM:
        w = [random_weights(B, ens.weight_rng) for _ in range(n)]
        return w, float(np.mean(w)), 0.0
    if ens.discrete:
        best = np.stack([m.values(batch.s_next, target=True).max(axis=1) for m in ens.members])
        std = q_stats(best).std
        w = confidence_weight(std, ens.temperature)
        return [w] * n, float(np.mean(w)), float(np.mean(std))
    std = _target_spread_continuous(ens, batch.s_next, [a for a, _ in next_samples])
    w = confidence_weight(std, ens.temperature)
    return list(w), float(np.mean(w)), float(np.mean(std))


def weighted_critic_step(ens: EnsembleAgent, batch: Batch, masks=None,
                         gamma: float = 0.99) -> UpdateReport:
    """One masked, weighted update of every member on a shared minibatch.

    Weights are computed from all target networks before any member moves.
    ``masks`` is (B, N); defaults to the batch's stored masks. SAC members also
    take their masked actor and temperature steps.
    """
    masks = batch.masks if masks is None else np.asarray(masks, dtype=np.float64)
    if masks.shape != (len(batch), ens.n):
        raise ContractError(f"masks shape {masks.shape} != ({len(batch)}, {ens.n})")
    all_ones = bool(np.all(masks == 1.0))
    next_samples = [None] * ens.n
    if not ens.discrete:
        next_samples = [m.sample(batch.s_next) for m in ens.members]
    weights, mean_w, mean_std = _member_weights(ens, batch, next_samples)
    losses = []
    for i, member in enumerate(ens.members):
        m_i = None if all_ones else masks[:, i]
        try:
            if ens.discrete:
                losses.append(dqn_update(member, batch, gamma, weights[i], m_i))
            else:
                losses.append(sac_update(member, batch, gamma, weights[i], m_i, next_samples[i]))
        except SunriseError as exc:
            raise type(exc)(f"member {i}: {exc}") from exc
    return UpdateReport(losses, mean_w, mean_std)
