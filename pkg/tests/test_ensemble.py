import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sunrise.agents import DqnAgent, DqnSettings, SacAgent, SacSettings, dqn_update, sac_update
from sunrise.diffcore import ContractError
from sunrise.ensemble import (EnsembleAgent, WeightScheme, confidence_weight, ensemble_q_stats,
                              eval_action, q_stats, random_inference_select, ucb_argmax,
                              ucb_select_continuous, ucb_select_discrete, weighted_critic_step)
from sunrise.envsim import exhaustive_transitions, make_chain
from sunrise.replay import Batch, draw_masks
from sunrise.seeding import member_rngs

SMALL = SacSettings(hidden=(8, 8))


def sac_batch(rng, n, B=16, obs=3, act=2, beta=1.0):
    masks = np.stack([draw_masks(beta, n, rng) for _ in range(B)])
    return Batch(rng.normal(size=(B, obs)), rng.uniform(-0.9, 0.9, (B, act)),
                 rng.normal(size=(B, 1)), rng.normal(size=(B, obs)),
                 (rng.random((B, 1)) < 0.1).astype(float), masks, np.arange(B))


def sac_ensemble(n, seed=0, **kw):
    return EnsembleAgent.create_sac(3, 2, n, seed, SMALL, **kw)


def params_of(agent):
    if isinstance(agent, DqnAgent):
        return np.concatenate([agent.q.theta, agent.q_target.theta])
    return np.concatenate([agent.critic.theta, agent.critic_target.theta, agent.actor.theta,
                           agent.log_alpha.theta])


class TestStats:
    def test_single_member_zero_std(self):
        s = q_stats(np.array([[3.7, -1.2]]))
        assert np.all(s.std == 0.0)

    def test_two_values(self):
        s = q_stats(np.array([1.0, 3.0]))
        assert s.mean == 2.0 and s.std == 1.0

    @given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=8), st.randoms())
    @settings(max_examples=100, deadline=None)
    def test_permutation_invariant(self, values, rnd):
        perm = list(values)
        rnd.shuffle(perm)
        a, b = q_stats(np.array(values)), q_stats(np.array(perm))
        assert a.mean == b.mean and a.std == b.std

    def test_identical_members_exact_zero(self):
        s = q_stats(np.full(5, 0.1 + 0.2))
        assert s.std == 0.0 and s.mean == 0.1 + 0.2

    def test_matches_numpy_population_std(self):
        v = np.random.default_rng(0).normal(size=(5, 40))
        np.testing.assert_allclose(q_stats(v).std, v.std(axis=0), rtol=1e-12)

    def test_ensemble_q_stats_shapes(self):
        ens = sac_ensemble(3)
        s, a = np.zeros((4, 3)), np.zeros((4, 2))
        st_ = ensemble_q_stats(ens, s, a)
        assert st_.mean.shape == (4, 1) and np.all(st_.std >= 0)
        dq = EnsembleAgent.create_dqn(4, 2, 3, 0, DqnSettings(hidden=(8,)))
        assert ensemble_q_stats(dq, np.eye(4), use_target=True).mean.shape == (4, 2)


class TestConfidenceWeight:
    def test_zero_std(self):
        assert confidence_weight(0.0, 20.0) == 1.0

    def test_saturation(self):
        assert abs(confidence_weight(1e6, 10.0) - 0.5) < 1e-9

    def test_known_value(self):
        assert abs(confidence_weight(0.1, 10.0) - (1 / (1 + math.e) + 0.5)) < 1e-12
        assert abs(confidence_weight(0.1, 10.0) - 0.76894) < 1e-5

    @given(st.floats(0, 1e6), st.floats(1e-3, 1e3))
    def test_bounds(self, std, T):
        assert 0.5 <= confidence_weight(std, T) <= 1.0

    def test_strictly_decreasing_moderate_range(self):
        std = np.linspace(0, 2, 1001)
        assert np.all(np.diff(confidence_weight(std, 10.0)) < 0)
        T = np.linspace(0.1, 5, 500)
        assert np.all(np.diff([confidence_weight(0.5, t) for t in T]) < 0)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            confidence_weight(1.0, 0.0)
        with pytest.raises(ValueError):
            confidence_weight(-1.0, 1.0)


class TestEnsembleAgent:
    def test_diversity_at_init(self):
        ens = sac_ensemble(5)
        for i in range(5):
            for j in range(i + 1, 5):
                for attr in ("critic", "actor"):
                    a = getattr(ens.members[i], attr).theta
                    b = getattr(ens.members[j], attr).theta
                    assert np.mean(a != b) >= 0.99

    def test_own_targets(self):
        ens = sac_ensemble(3)
        ids = {id(m.critic_target) for m in ens.members}
        assert len(ids) == 3
        assert all(m.critic_target is not m.critic for m in ens.members)

    @pytest.mark.parametrize("kw", [dict(temperature=0.0), dict(ucb_lambda=-1.0),
                                    dict(beta=0.0), dict(scheme="random")])
    def test_invalid(self, kw):
        with pytest.raises(ContractError):
            sac_ensemble(2, **kw)


class TestWeightedStep:
    def test_reduction_to_single_sac(self):
        ens = sac_ensemble(1, seed=3, ucb_lambda=7.0)
        lone = SacAgent.create(3, 2, member_rngs(3, 1)[0], SMALL)
        rng_a, rng_b = np.random.default_rng(1), np.random.default_rng(1)
        for _ in range(25):
            weighted_critic_step(ens, sac_batch(rng_a, 1), gamma=0.99)
            sac_update(lone, sac_batch(rng_b, 1), 0.99)
        assert params_of(ens.members[0]).tobytes() == params_of(lone).tobytes()

    def test_reduction_to_independent_dqn(self):
        mdp = make_chain(5, p_slip=0.2)
        s, a, r, s2, d = exhaustive_transitions(mdp, 5)
        eye = np.eye(5)
        b = Batch(eye[s], a, r[:, None], eye[s2], d[:, None].astype(float),
                  np.ones((len(s), 3)), np.arange(len(s)))
        ens = EnsembleAgent.create_dqn(5, 2, 3, 4, DqnSettings(hidden=(8,)))
        lone = [DqnAgent.create(5, 2, g, DqnSettings(hidden=(8,))) for g in member_rngs(4, 3)]
        for _ in range(20):
            weighted_critic_step(ens, b, gamma=0.9)
            for m in lone:
                dqn_update(m, b, 0.9)
        for x, y in zip(ens.members, lone):
            assert params_of(x).tobytes() == params_of(y).tobytes()

    def test_zero_masks_freeze_member(self):
        ens = sac_ensemble(3)
        rng = np.random.default_rng(2)
        b = sac_batch(rng, 3)
        b.masks[:, 1] = 0.0
        frozen = [ens.members[1].critic.theta.copy(), ens.members[1].actor.theta.copy()]
        moving = ens.members[0].critic.theta.copy()
        weighted_critic_step(ens, b, gamma=0.99)
        assert ens.members[1].critic.theta.tobytes() == frozen[0].tobytes()
        assert ens.members[1].actor.theta.tobytes() == frozen[1].tobytes()
        assert ens.members[0].critic.theta.tobytes() != moving.tobytes()

    @pytest.mark.parametrize("discrete", [False, True])
    def test_degenerate_std_equals_uniform(self, discrete):
        def build(scheme):
            if discrete:
                ens = EnsembleAgent.create_dqn(5, 2, 3, 0, DqnSettings(hidden=(8,)), scheme=scheme)
                for m in ens.members[1:]:
                    m.q_target.theta[:] = ens.members[0].q_target.theta
            else:
                ens = sac_ensemble(3, scheme=scheme)
                for m in ens.members[1:]:
                    m.critic_target.theta[:] = ens.members[0].critic_target.theta
            return ens

        if discrete:
            mdp = make_chain(5)
            s, a, r, s2, d = exhaustive_transitions(mdp)
            eye = np.eye(5)
            batch = Batch(eye[s], a, r[:, None], eye[s2], d[:, None].astype(float),
                          np.ones((len(s), 3)), np.arange(len(s)))
        else:
            batch = sac_batch(np.random.default_rng(5), 3)
        std_ens, uni_ens = build("ensemble_std"), build("uniform")
        rep = weighted_critic_step(std_ens, batch, gamma=0.9)
        weighted_critic_step(uni_ens, batch, gamma=0.9)
        assert rep.mean_weight == 1.0 and rep.mean_q_std == 0.0
        for x, y in zip(std_ens.members, uni_ens.members):
            assert params_of(x).tobytes() == params_of(y).tobytes()

    def test_weights_in_range(self):
        for scheme in ("random", "ensemble_std"):
            ens = sac_ensemble(4, scheme=scheme, temperature=5.0,
                               weight_rng=np.random.default_rng(0))
            rep = weighted_critic_step(ens, sac_batch(np.random.default_rng(1), 4), gamma=0.99)
            assert 0.5 <= rep.mean_weight <= 1.0
            assert len(rep.losses) == 4

    def test_mask_shape_checked(self):
        ens = sac_ensemble(2)
        with pytest.raises(ContractError):
            weighted_critic_step(ens, sac_batch(np.random.default_rng(0), 3), gamma=0.99)

    def test_member_named_in_errors(self):
        ens = sac_ensemble(2)
        b = sac_batch(np.random.default_rng(0), 2)
        b.r[3, 0] = np.nan
        with pytest.raises(Exception, match="member 0"):
            weighted_critic_step(ens, b, gamma=0.99)


class TestUcb:
    def test_two_candidate_arithmetic(self):
        assert ucb_argmax([1.0, 0.5], [0.0, 1.0], 1.0) == 1

    def test_ties_lowest_index(self):
        assert ucb_argmax([2.0, 2.0, 1.0], [0.0, 0.0, 1.0], 1.0) == 0

    def test_discrete_examples(self):
        assert ucb_argmax([1, 3, 2], [5, 0, 9], 0.0) == 1
        assert ucb_argmax([1, 1], [0, 2], 1.0) == 1

    @given(st.integers(0, 2 ** 31), st.floats(0.1, 10))
    @settings(max_examples=50, deadline=None)
    def test_proportional_scaling(self, seed, c):
        q = np.random.default_rng(seed).normal(size=(5, 4))
        lam = 1.0
        a = q_stats(q)
        b = q_stats(c * q)
        assert ucb_argmax(a.mean, a.std, lam) == ucb_argmax(b.mean, b.std, lam)

    def test_shift_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            q = rng.normal(size=(5, 6))
            c = rng.normal() * 10
            a, b = q_stats(q), q_stats(q + c)
            lam = rng.uniform(0, 5)
            assert ucb_argmax(a.mean, a.std, lam) == ucb_argmax(b.mean, b.std, lam)

    def test_discrete_select(self):
        ens = EnsembleAgent.create_dqn(4, 2, 3, 0, DqnSettings(hidden=(8,)), ucb_lambda=0.0)
        s = np.eye(4)[2]
        mean_q = np.mean([m.values(s[None])[0] for m in ens.members], axis=0)
        assert ucb_select_discrete(ens, s) == int(np.argmax(mean_q))

    def test_continuous_lambda_zero_picks_mean_argmax(self):
        ens = sac_ensemble(4, ucb_lambda=0.0)
        s = np.array([0.1, -0.3, 0.2])
        a, k = ucb_select_continuous(ens, s, np.random.default_rng(9))
        rng = np.random.default_rng(9)
        cands = [m.sample(s[None], rng)[0] for m in ens.members]
        means = [np.mean([m.q(s[None], c)[0, 0] for m in ens.members]) for c in cands]
        assert k == int(np.argmax(means))
        assert a.tobytes() == cands[k][0].tobytes()

    def test_single_member_returns_policy_sample(self):
        ens = sac_ensemble(1, ucb_lambda=50.0)
        s = np.array([0.1, -0.3, 0.2])
        a, k = ucb_select_continuous(ens, s, np.random.default_rng(4))
        expect = ens.members[0].sample(s[None], np.random.default_rng(4))[0][0]
        assert k == 0 and a.tobytes() == expect.tobytes()
        assert np.all(np.abs(a) < 1)


class TestRandomInference:
    def test_single_member(self):
        ens = sac_ensemble(1)
        rng = np.random.default_rng(0)
        assert all(random_inference_select(ens, rng) == 0 for _ in range(100))

    def test_uniform_frequencies(self):
        ens = sac_ensemble(5)
        rng = np.random.default_rng(1)
        idx = np.array([random_inference_select(ens, rng) for _ in range(10_000)])
        freq = np.bincount(idx, minlength=5) / idx.size
        assert np.all(np.abs(freq - 0.2) < 3 * math.sqrt(0.2 * 0.8 / idx.size))


class TestEvalAction:
    def test_single_member_is_policy_mean(self):
        ens = sac_ensemble(1)
        s = np.array([0.4, 0.1, -0.2])
        expect = np.tanh(ens.members[0].mean_action(s[None]))[0]
        np.testing.assert_array_equal(eval_action(ens, s), expect)

    def test_identical_members(self):
        ens = sac_ensemble(3)
        for m in ens.members[1:]:
            m.actor.theta[:] = ens.members[0].actor.theta
        s = np.random.default_rng(0).normal(size=(6, 3))
        single = sac_ensemble(1)
        single.members[0].actor.theta[:] = ens.members[0].actor.theta
        np.testing.assert_allclose(eval_action(ens, s), eval_action(single, s), rtol=0, atol=1e-15)

    def test_symmetric_pair(self):
        ens = sac_ensemble(2)
        for m, sign in zip(ens.members, (1.0, -1.0)):
            W, b = m.actor.layers[-1]
            W[...] = 0.0
            b[:2] = sign * 0.7
        assert np.all(eval_action(ens, np.zeros(3)) == 0.0)

    def test_discrete_mean_argmax(self):
        ens = EnsembleAgent.create_dqn(4, 2, 3, 2, DqnSettings(hidden=(8,)))
        s = np.eye(4)
        mean_q = np.mean([m.values(s) for m in ens.members], axis=0)
        np.testing.assert_array_equal(eval_action(ens, s), np.argmax(mean_q, axis=1))
