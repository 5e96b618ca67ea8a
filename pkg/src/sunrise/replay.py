"""Ring-buffer replay storage with per-member bootstrap masks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffcore.errors import ContractError


def draw_masks(beta: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent Bernoulli(beta) bits as float64 0/1 values."""
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    return (rng.random(n) < beta).astype(np.float64)


@dataclass
class Transition:
    s: np.ndarray
    a: np.ndarray | int
    r: float
    s_next: np.ndarray
    done: bool
    masks: np.ndarray


@dataclass
class Batch:
    """A sampled minibatch as stacked copies; rewards/dones/masks are columns."""

    s: np.ndarray
    a: np.ndarray
    r: np.ndarray
    s_next: np.ndarray
    done: np.ndarray
    masks: np.ndarray
    indices: np.ndarray

    def __len__(self):
        return len(self.indices)

    def transitions(self):
        for k in range(len(self)):
            a = self.a[k] if self.a.ndim > 1 else int(self.a[k])
            yield Transition(self.s[k], a, float(self.r[k, 0]), self.s_next[k],
                             bool(self.done[k, 0]), self.masks[k]), int(self.indices[k])

    def subset(self, rows) -> "Batch":
        rows = np.asarray(rows)
        return Batch(self.s[rows], self.a[rows], self.r[rows], self.s_next[rows],
                     self.done[rows], self.masks[rows], self.indices[rows])


class ReplayBuffer:
    """Fixed-capacity FIFO store; the oldest transition is overwritten once full.

    Continuous actions are stored as float vectors (``act_dim`` wide); pass
    ``discrete=True`` to store integer action indices instead.
    """

    def __init__(self, capacity: int, obs_dim: int, act_dim: int, n_members: int,
                 discrete: bool = False):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.n_members = n_members
        self.discrete = discrete
        self._s = np.zeros((capacity, obs_dim))
        self._s_next = np.zeros((capacity, obs_dim))
        self._a = np.zeros(capacity, dtype=np.int64) if discrete else np.zeros((capacity, act_dim))
        self._r = np.zeros((capacity, 1))
        self._done = np.zeros((capacity, 1))
        self._masks = np.zeros((capacity, n_members))
        self.cursor = 0
        self.size = 0

    def __len__(self):
        return self.size

    def push(self, t: Transition):
        masks = np.asarray(t.masks, dtype=np.float64).reshape(-1)
        if masks.size != self.n_members:
            raise ContractError(f"mask length {masks.size} != ensemble size {self.n_members}")
        if np.any((masks != 0.0) & (masks != 1.0)):
            raise ContractError("masks must be 0/1")
        i = self.cursor
        self._s[i] = t.s
        self._s_next[i] = t.s_next
        self._a[i] = t.a
        self._r[i, 0] = t.r
        self._done[i, 0] = float(t.done)
        self._masks[i] = masks
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch: int, rng: np.random.Generator) -> Batch:
        """Uniform draw with replacement over occupied slots."""
        if self.size == 0:
            raise ContractError("cannot sample from an empty replay buffer")
        idx = rng.integers(0, self.size, size=batch)
        return Batch(self._s[idx], self._a[idx], self._r[idx], self._s_next[idx],
                     self._done[idx], self._masks[idx], idx)

    def get(self, index: int) -> Transition:
        if not 0 <= index < self.size:
            raise IndexError(index)
        a = int(self._a[index]) if self.discrete else self._a[index].copy()
        return Transition(self._s[index].copy(), a, float(self._r[index, 0]),
                          self._s_next[index].copy(), bool(self._done[index, 0]),
                          self._masks[index].copy())
