"""Continuous cart-pole swing-up.

Angle convention: ``theta = 0`` is upright and ``theta = pi`` hangs down. The
pole is a uniform rod of half-length ``l`` (moment of inertia m l^2 / 3 about
its centre); the cart track is unbounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..diffcore.errors import ContractError
from .base import Env, StepResult


@dataclass(frozen=True)
class CartpoleParams:
    cart_mass: float = 1.0
    pole_mass: float = 0.1
    half_length: float = 0.5
    gravity: float = 9.8
    dt: float = 0.01
    force_scale: float = 10.0
    max_steps: int = 500
    # semi-implicit Euler substeps per control step of length dt
    substeps: int = 10


@dataclass(frozen=True)
class CartpoleState:
    x: float = 0.0
    x_dot: float = 0.0
    theta: float = math.pi
    theta_dot: float = 0.0
    step_index: int = 0
    done: bool = False

    @property
    def observation(self) -> np.ndarray:
        return np.array([self.x, math.cos(self.theta), math.sin(self.theta),
                         self.x_dot, self.theta_dot])


def dense_reward(theta: float) -> float:
    return (1.0 + math.cos(theta)) / 2.0


def cartpole_swingup_step(state: CartpoleState, action: float,
                          physics: CartpoleParams = CartpoleParams()) -> StepResult:
    """Advance one control step of length ``dt`` under force ``force_scale * action``.

    The step is integrated with ``substeps`` semi-implicit Euler updates
    (velocities first, then positions from the new velocities).
    """
    if state.done:
        raise ContractError("cannot step a finished cart-pole episode; reset first")
    action = float(action)
    if not -1.0 <= action <= 1.0:
        raise ContractError(f"action {action} outside [-1, 1]")
    p = physics
    total = p.cart_mass + p.pole_mass
    pml = p.pole_mass * p.half_length
    force = p.force_scale * action
    h = p.dt / p.substeps
    x, x_dot, theta, theta_dot = state.x, state.x_dot, state.theta, state.theta_dot
    for _ in range(p.substeps):
        sin_t, cos_t = math.sin(theta), math.cos(theta)
        temp = (force + pml * theta_dot * theta_dot * sin_t) / total
        theta_acc = (p.gravity * sin_t - cos_t * temp) / (
            p.half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total))
        x_acc = temp - pml * theta_acc * cos_t / total
        x_dot += h * x_acc
        x += h * x_dot
        theta_dot += h * theta_acc
        theta += h * theta_dot
    step_index = state.step_index + 1
    done = step_index >= p.max_steps
    nxt = CartpoleState(x, x_dot, theta, theta_dot, step_index, done)
    return StepResult(nxt.observation, dense_reward(theta), done, terminal=False, state=nxt)


def mechanical_energy(state: CartpoleState, physics: CartpoleParams = CartpoleParams()) -> float:
    p = physics
    m, l = p.pole_mass, p.half_length
    kinetic = (0.5 * (p.cart_mass + m) * state.x_dot ** 2
               + m * l * state.x_dot * state.theta_dot * math.cos(state.theta)
               + (2.0 / 3.0) * m * l ** 2 * state.theta_dot ** 2)
    return kinetic + m * p.gravity * l * math.cos(state.theta)


class CartpoleSwingup(Env):
    """Episodic swing-up task starting near the hanging position.

    Reset draws ``x ~ N(0, 0.01^2)`` and ``theta ~ pi + N(0, 0.01^2)``.
    """

    obs_dim = 5
    act_dim = 1
    discrete = False

    def __init__(self, physics: CartpoleParams = CartpoleParams(), reset_noise: float = 0.01):
        self.physics = physics
        self.reset_noise = reset_noise
        self.state = CartpoleState(done=True)

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        x, dtheta = rng.normal(0.0, self.reset_noise, size=2) if self.reset_noise else (0.0, 0.0)
        self.state = CartpoleState(x=float(x), theta=math.pi + float(dtheta))
        return self.state.observation

    def set_state(self, state: CartpoleState):
        self.state = replace(state)

    def step(self, action) -> StepResult:
        a = float(np.asarray(action).reshape(-1)[0])
        res = cartpole_swingup_step(self.state, a, self.physics)
        self.state = res.state
        return res

    def pole_cosine(self) -> float:
        return math.cos(self.state.theta)
