"""Tabular chain MDP with slip, its exact value iteration, and an env view."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..diffcore.errors import ContractError
from .base import Env, StepResult

LEFT, RIGHT = 0, 1


@dataclass
class ChainMdp:
    """Finite MDP over ``n_states`` states and two actions.

    ``transitions[s, a]`` is a distribution over next states, ``rewards[s, a]``
    the immediate reward and ``terminal[s, a]`` whether the step ends the
    episode (no bootstrapping past it).
    """

    transitions: np.ndarray
    rewards: np.ndarray
    terminal: np.ndarray
    gamma: float
    p_slip: float = 0.0

    def __post_init__(self):
        self.transitions = np.asarray(self.transitions, dtype=np.float64)
        self.rewards = np.asarray(self.rewards, dtype=np.float64)
        self.terminal = np.asarray(self.terminal, dtype=bool)
        n, a, n2 = self.transitions.shape
        if n != n2 or self.rewards.shape != (n, a) or self.terminal.shape != (n, a):
            raise ValueError("inconsistent table shapes")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if np.any(np.abs(self.transitions.sum(axis=2) - 1.0) > 1e-12):
            raise ValueError("transition rows must sum to 1")
        self._cdf = np.cumsum(self.transitions, axis=2)

    @property
    def n_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transitions.shape[1]


def make_chain(n_states: int = 5, p_slip: float = 0.0, gamma: float = 0.9,
               goal_reward: float = 1.0, left_reward: float = 0.0) -> ChainMdp:
    """Chain with a rewarding terminal goal at the right end.

    Any action taken in the last state pays ``goal_reward`` and ends the
    episode. Moving left from state 0 pays ``left_reward``. With probability
    ``p_slip`` the agent moves opposite to the chosen direction.
    """
    if not 0.0 <= p_slip <= 1.0:
        raise ValueError(f"p_slip must lie in [0, 1], got {p_slip}")
    P = np.zeros((n_states, 2, n_states))
    R = np.zeros((n_states, 2))
    done = np.zeros((n_states, 2), dtype=bool)
    for s in range(n_states):
        left, right = max(s - 1, 0), min(s + 1, n_states - 1)
        P[s, RIGHT, right] += 1.0 - p_slip
        P[s, RIGHT, left] += p_slip
        P[s, LEFT, left] += 1.0 - p_slip
        P[s, LEFT, right] += p_slip
    R[0, LEFT] = left_reward
    goal = n_states - 1
    P[goal] = 0.0
    P[goal, :, goal] = 1.0
    R[goal] = goal_reward
    done[goal] = True
    return ChainMdp(P, R, done, gamma, p_slip)


def chain_step(mdp: ChainMdp, state: int, action: int, rng: np.random.Generator) -> StepResult:
    if not 0 <= state < mdp.n_states:
        raise IndexError(f"state {state} out of range [0, {mdp.n_states})")
    if not 0 <= action < mdp.n_actions:
        raise IndexError(f"action {action} out of range [0, {mdp.n_actions})")
    cdf = mdp._cdf[state, action]
    nxt = int(np.searchsorted(cdf, rng.random(), side="right"))
    nxt = min(nxt, mdp.n_states - 1)
    term = bool(mdp.terminal[state, action])
    return StepResult(one_hot(nxt, mdp.n_states), float(mdp.rewards[state, action]),
                      term, terminal=term, state=nxt)


def one_hot(s: int, n: int) -> np.ndarray:
    v = np.zeros(n)
    v[s] = 1.0
    return v


def bellman_backup(mdp: ChainMdp, Q: np.ndarray) -> np.ndarray:
    v = Q.max(axis=1)
    return mdp.rewards + mdp.gamma * (~mdp.terminal) * (mdp.transitions @ v)


def value_iteration(mdp: ChainMdp, tol: float = 1e-10, max_iter: int = 1_000_000) -> np.ndarray:
    """Optimal action values with sup-norm Bellman residual below ``tol``."""
    Q = np.zeros((mdp.n_states, mdp.n_actions))
    for _ in range(max_iter):
        Q_new = bellman_backup(mdp, Q)
        if np.max(np.abs(Q_new - Q)) < tol:
            # residual of Q_new is at most gamma times this change
            return Q_new
        Q = Q_new
    raise RuntimeError("value iteration did not converge")


class ChainEnv(Env):
    """Episodic view of a :class:`ChainMdp` with one-hot observations."""

    act_dim = 2
    discrete = True

    def __init__(self, mdp: ChainMdp, rng: np.random.Generator, horizon: int = 20,
                 start_state: int = 0):
        self.mdp = mdp
        self.rng = rng
        self.horizon = horizon
        self.start_state = start_state
        self.obs_dim = mdp.n_states
        self.state = start_state
        self.t = 0
        self.done = True

    def reset(self, rng=None) -> np.ndarray:
        self.state, self.t, self.done = self.start_state, 0, False
        return one_hot(self.state, self.mdp.n_states)

    def step(self, action) -> StepResult:
        if self.done:
            raise ContractError("cannot step a finished chain episode; reset first")
        res = chain_step(self.mdp, self.state, int(action), self.rng)
        self.state = res.state
        self.t += 1
        if self.t >= self.horizon and not res.done:
            res.done = True
        self.done = res.done
        return res

    def optimal_return(self) -> float:
        """Undiscounted episode return of the greedy value-iteration policy (deterministic MDPs)."""
        Q = value_iteration(self.mdp)
        s, total = self.start_state, 0.0
        for _ in range(self.horizon):
            a = int(np.argmax(Q[s]))
            total += self.mdp.rewards[s, a]
            if self.mdp.terminal[s, a]:
                break
            s = int(np.argmax(self.mdp.transitions[s, a]))
        return float(total)


def exhaustive_transitions(mdp: ChainMdp, copies: int = 1):
    """Every (s, a, s') triple repeated in exact proportion to its probability.

    Returns arrays ``(s, a, r, s_next, terminal)``; ``copies * P[s, a, s']`` must
    be integral so the empirical next-state distribution equals the table.
    """
    counts = mdp.transitions * copies
    if np.any(np.abs(counts - np.round(counts)) > 1e-9):
        raise ValueError(f"copies={copies} cannot represent the transition table exactly")
    counts = np.round(counts).astype(int)
    s, a, s2 = np.nonzero(counts)
    reps = counts[s, a, s2]
    s, a, s2 = np.repeat(s, reps), np.repeat(a, reps), np.repeat(s2, reps)
    return s, a, mdp.rewards[s, a], s2, mdp.terminal[s, a]
