"""Seeded end-to-end training: collect, mask, store, sample, update, evaluate."""

from __future__ import annotations

import csv
import os
import time
from pathlib import Path

import numpy as np

from ..agents import DqnAgent, DqnSettings, SacAgent, SacSettings, dqn_update, sac_update
from ..diffcore import squash_mean
from ..diffcore.errors import SunriseError
from ..ensemble import (EnsembleAgent, UpdateReport, eval_action, member_action,
                        random_inference_select, ucb_select_continuous, ucb_select_discrete,
                        weighted_critic_step)
from ..envsim import CartpoleSwingup, ChainEnv, make_chain, noisy_reward_wrap, sparse_wrap
from ..replay import ReplayBuffer, Transition, draw_masks
from ..seeding import member_rngs, stream
from .config import RunConfig


class RunError(SunriseError, RuntimeError):
    """A training run aborted; the message carries the step and the config."""


def make_env(cfg: RunConfig, seed: int, evaluation: bool = False):
    if cfg.env == "chain":
        mdp = make_chain(cfg.chain_states, p_slip=cfg.chain_slip, gamma=cfg.gamma)
        return ChainEnv(mdp, stream(seed, "eval_env" if evaluation else "env"), cfg.chain_horizon)
    env = CartpoleSwingup()
    if cfg.sparse:
        env = sparse_wrap(env)
    if cfg.reward_noise > 0:
        env = noisy_reward_wrap(env, cfg.reward_noise, stream(seed, "reward_noise"), evaluation)
    return env


def sac_settings(cfg: RunConfig) -> SacSettings:
    return SacSettings(hidden=tuple(cfg.hidden), lr=cfg.lr, alpha_lr=cfg.alpha_lr,
                       init_alpha=cfg.init_alpha, learn_alpha=cfg.learn_alpha, tau=cfg.tau)


def dqn_settings(cfg: RunConfig) -> DqnSettings:
    return DqnSettings(hidden=tuple(cfg.hidden), lr=cfg.lr, tau=cfg.tau)


class SingleLearner:
    """A lone SAC or DQN agent trained with the plain, unweighted update."""

    def __init__(self, cfg: RunConfig, obs_dim: int, act_dim: int, seed: int):
        rng = member_rngs(seed, 1)[0]
        self.discrete = cfg.algorithm == "dqn"
        self.gamma = cfg.gamma
        self.n_members = 1
        self.episode_member = 0
        if self.discrete:
            self.agent = DqnAgent.create(obs_dim, act_dim, rng, dqn_settings(cfg))
        else:
            self.agent = SacAgent.create(obs_dim, act_dim, rng, sac_settings(cfg))

    def begin_episode(self, episode_rng):
        pass

    def explore(self, obs, rng):
        s = obs.reshape(1, -1)
        if self.discrete:
            return int(self.agent.greedy(s)[0])
        return self.agent.sample(s, rng)[0][0]

    def update(self, batch) -> UpdateReport:
        if self.discrete:
            loss = dqn_update(self.agent, batch, self.gamma)
        else:
            loss = sac_update(self.agent, batch, self.gamma)
        return UpdateReport([loss], 1.0, 0.0)

    def act_eval(self, obs_batch):
        if self.discrete:
            return self.agent.greedy(obs_batch)
        return squash_mean(self.agent.mean_action(obs_batch))


class EnsembleLearner:
    """N members with weighted, masked updates and UCB or per-episode random inference."""

    def __init__(self, cfg: RunConfig, obs_dim: int, act_dim: int, seed: int):
        kw = dict(temperature=cfg.weight_temp, ucb_lambda=cfg.ucb_lambda, beta=cfg.mask_beta,
                  scheme=cfg.scheme, weight_rng=stream(seed, "weights"))
        if cfg.algorithm == "dqn":
            self.ens = EnsembleAgent.create_dqn(obs_dim, act_dim, cfg.ensemble_n, seed,
                                                dqn_settings(cfg), **kw)
        else:
            self.ens = EnsembleAgent.create_sac(obs_dim, act_dim, cfg.ensemble_n, seed,
                                                sac_settings(cfg), **kw)
        self.discrete = self.ens.discrete
        self.inference = cfg.inference
        self.gamma = cfg.gamma
        self.n_members = self.ens.n
        self.episode_member = 0

    def begin_episode(self, episode_rng):
        if self.inference == "random":
            self.episode_member = random_inference_select(self.ens, episode_rng)

    def explore(self, obs, rng):
        if self.inference == "random":
            return member_action(self.ens, self.episode_member, obs, rng)
        if self.discrete:
            return ucb_select_discrete(self.ens, obs)
        return ucb_select_continuous(self.ens, obs, rng)[0]

    def update(self, batch) -> UpdateReport:
        return weighted_critic_step(self.ens, batch, gamma=self.gamma)

    def act_eval(self, obs_batch):
        return eval_action(self.ens, obs_batch)


def make_learner(cfg: RunConfig, obs_dim: int, act_dim: int, seed: int):
    cls = EnsembleLearner if cfg.learner == "ensemble" else SingleLearner
    return cls(cfg, obs_dim, act_dim, seed)


def evaluate(learner, cfg: RunConfig, seed: int, eval_rng: np.random.Generator) -> float:
    """Mean ground-truth return of the deterministic policy over ``eval_episodes``.

    Episodes run in lockstep so the policy is queried once per step for the
    whole batch of live episodes.
    """
    envs = [make_env(cfg, seed, evaluation=True) for _ in range(cfg.eval_episodes)]
    if cfg.env == "chain":
        for env in envs:
            env.rng = eval_rng
    obs = [env.reset(eval_rng) for env in envs]
    totals = np.zeros(len(envs))
    live = list(range(len(envs)))
    while live:
        actions = learner.act_eval(np.stack([obs[i] for i in live]))
        still = []
        for i, a in zip(live, actions):
            res = envs[i].step(a)
            totals[i] += res.reward
            obs[i] = res.next_observation
            if not res.done:
                still.append(i)
        live = still
    return float(totals.mean())


def metric_header(cfg: RunConfig) -> list[str]:
    cols = ["seed", "step", "eval_return", "mean_weight", "mean_q_std"]
    cols += [f"critic_loss_{i}" for i in range(cfg.members)]
    if cfg.log_wall_clock:
        cols.append("wall_clock")
    return cols


def _fmt(v) -> str:
    return repr(int(v)) if isinstance(v, (int, np.integer)) else repr(float(v))


class _Accumulator:
    def __init__(self, n):
        self.n = n
        self.reset()

    def reset(self):
        self.count = 0
        self.loss = np.zeros(self.n)
        self.weight = 0.0
        self.std = 0.0

    def add(self, rep: UpdateReport):
        self.count += 1
        self.loss += np.asarray(rep.losses, dtype=np.float64)
        self.weight += rep.mean_weight
        self.std += rep.mean_q_std

    def means(self):
        if self.count == 0:
            return float("nan"), float("nan"), [float("nan")] * self.n
        c = self.count
        return self.weight / c, self.std / c, list(self.loss / c)


def train_seed(cfg: RunConfig, seed: int, on_row=None, hooks=None) -> list[dict]:
    """Run one seed and return its metric rows.

    ``on_row`` receives each row as it is produced. ``hooks`` may hold
    ``on_step(t, learner, transition)`` for instrumentation.
    """
    env = make_env(cfg, seed)
    obs_dim, act_dim = env.obs_dim, env.act_dim
    discrete = cfg.algorithm == "dqn"
    learner = make_learner(cfg, obs_dim, act_dim, seed)
    n = learner.n_members
    buf = ReplayBuffer(cfg.buffer_capacity, obs_dim, act_dim, n, discrete=discrete)
    env_rng, explore_rng = stream(seed, "env"), stream(seed, "explore")
    mask_rng, buffer_rng = stream(seed, "masks"), stream(seed, "buffer")
    episode_rng, eval_rng = stream(seed, "episode"), stream(seed, "eval_env")
    acc = _Accumulator(n)
    rows = []
    start = time.perf_counter()
    obs, episode_over = None, True
    t = 0
    try:
        for t in range(cfg.total_steps):
            if episode_over:
                obs = env.reset(env_rng)
                learner.begin_episode(episode_rng)
                episode_over = False
            if t < cfg.initial_steps:
                a = (int(explore_rng.integers(act_dim)) if discrete
                     else explore_rng.uniform(-1.0, 1.0, act_dim))
            else:
                a = learner.explore(obs, explore_rng)
            res = env.step(a)
            tr = Transition(obs, a, res.reward, res.next_observation, res.terminal,
                            draw_masks(cfg.mask_beta, n, mask_rng))
            buf.push(tr)
            if hooks and "on_step" in hooks:
                hooks["on_step"](t, learner, tr)
            obs, episode_over = res.next_observation, res.done
            if t + 1 >= cfg.initial_steps:
                for _ in range(cfg.updates_per_step):
                    acc.add(learner.update(buf.sample(cfg.batch_size, buffer_rng)))
            step = t + 1
            if step % cfg.eval_interval == 0 or step == cfg.total_steps:
                w, q_std, losses = acc.means()
                row = {"seed": seed, "step": step,
                       "eval_return": evaluate(learner, cfg, seed, eval_rng),
                       "mean_weight": w, "mean_q_std": q_std}
                row.update({f"critic_loss_{i}": v for i, v in enumerate(losses)})
                if cfg.log_wall_clock:
                    row["wall_clock"] = time.perf_counter() - start
                acc.reset()
                rows.append(row)
                if on_row:
                    on_row(row)
    except (SunriseError, ArithmeticError, ValueError, IndexError) as exc:
        raise RunError(f"run failed at step {t} (seed {seed}): {type(exc).__name__}: {exc}\n"
                       f"config: {cfg.to_json()}") from exc
    return rows


def run_training(cfg: RunConfig, out_path, seeds=None) -> Path:
    """Train every seed, streaming rows to one CSV; returns the CSV path."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    seeds = list(seeds) if seeds is not None else (cfg.seeds or [0])
    header = metric_header(cfg)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        fh.flush()

        def emit(row):
            writer.writerow([_fmt(row[c]) for c in header])
            fh.flush()

        for seed in seeds:
            train_seed(cfg, seed, on_row=emit)
        fh.flush()
        os.fsync(fh.fileno())
    return out_path


def read_metrics(path) -> dict[int, dict[str, np.ndarray]]:
    """Metric columns per seed from a training CSV."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        by_seed: dict[int, dict[str, list]] = {}
        for row in reader:
            cols = by_seed.setdefault(int(row["seed"]), {})
            for k, v in row.items():
                if k != "seed":
                    cols.setdefault(k, []).append(float(v))
    return {s: {k: np.asarray(v) for k, v in cols.items()} for s, cols in by_seed.items()}
