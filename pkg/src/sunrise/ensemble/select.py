"""Action selection: UCB exploration, per-episode random member, evaluation."""

from __future__ import annotations

import numpy as np

from ..diffcore import squash_mean
from .agent import EnsembleAgent
from .weights import q_stats


def ucb_argmax(mean, std, lam: float) -> int:
    """Index maximising mean + lam * std; ties go to the lowest index."""
    score = np.asarray(mean, dtype=np.float64) + lam * np.asarray(std, dtype=np.float64)
    return int(np.argmax(score))


def ucb_select_continuous(ens: EnsembleAgent, s, rng: np.random.Generator):
    """One candidate per member policy, scored by live-critic mean + lambda * std.

    Returns ``(action, chosen member index)``.
    """
    s = np.asarray(s, dtype=np.float64).reshape(1, -1)
    candidates = np.concatenate([m.sample(s, rng)[0] for m in ens.members], axis=0)
    if ens.n == 1:
        return candidates[0], 0
    states = np.repeat(s, ens.n, axis=0)
    stats = q_stats(np.stack([m.q(states, candidates)[:, 0] for m in ens.members]))
    k = ucb_argmax(stats.mean, stats.std, ens.ucb_lambda)
    return candidates[k], k


def ucb_select_discrete(ens: EnsembleAgent, s) -> int:
    """Exact argmax over the action set of mean + lambda * std across members."""
    s = np.asarray(s, dtype=np.float64).reshape(1, -1)
    stats = q_stats(np.stack([m.values(s)[0] for m in ens.members]))
    return ucb_argmax(stats.mean, stats.std, ens.ucb_lambda)


def random_inference_select(ens: EnsembleAgent, episode_rng: np.random.Generator) -> int:
    """Zero-based member index, drawn once per episode."""
    return int(episode_rng.integers(ens.n))


def member_action(ens: EnsembleAgent, k: int, s, rng: np.random.Generator):
    """Exploratory action from member ``k`` alone (greedy for Q-learners)."""
    s = np.asarray(s, dtype=np.float64).reshape(1, -1)
    member = ens.members[k]
    if ens.discrete:
        return int(member.greedy(s)[0])
    return member.sample(s, rng)[0][0]


def eval_action(ens: EnsembleAgent, s):
    """Deterministic action for one state or a (B, obs_dim) batch.

    Continuous: tanh of the members' averaged pre-squash means. Discrete:
    argmax of the mean Q over members, ties to the lowest index.
    """
    s = np.asarray(s, dtype=np.float64)
    single = s.ndim == 1
    s2 = s.reshape(1, -1) if single else s
    if ens.discrete:
        mean_q = np.stack([m.values(s2) for m in ens.members]).mean(axis=0)
        out = np.argmax(mean_q, axis=1)
        return int(out[0]) if single else out
    mean = np.stack([m.mean_action(s2) for m in ens.members]).mean(axis=0)
    out = squash_mean(mean)
    return out[0] if single else out
