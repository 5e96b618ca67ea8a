import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sunrise.agents import (DqnAgent, DqnSettings, SacAgent, SacSettings, alpha_update,
                            dqn_loss, dqn_update, sac_actor_loss, sac_critic_loss, sac_update,
                            target_sync)
from sunrise.diffcore import (ContractError, DimensionError, MlpParams, NonFiniteError, Tape,
                              grad_check)
from sunrise.envsim import exhaustive_transitions, make_chain, value_iteration
from sunrise.replay import Batch

SMALL = SacSettings(hidden=(8, 8))


def sac_batch(rng, B=8, obs=3, act=2, done_frac=0.25):
    return Batch(rng.normal(size=(B, obs)), rng.uniform(-0.9, 0.9, (B, act)),
                 rng.normal(size=(B, 1)), rng.normal(size=(B, obs)),
                 (rng.random((B, 1)) < done_frac).astype(float), np.ones((B, 1)), np.arange(B))


def make_sac(seed=0, obs=3, act=2, settings=SMALL):
    return SacAgent.create(obs, act, np.random.default_rng(seed), settings)


def fixed_next(agent, batch, seed=11):
    return agent.sample(batch.s_next, np.random.default_rng(seed))


class TestSacCritic:
    def test_zero_when_q_equals_reward(self):
        rng = np.random.default_rng(0)
        agent = make_sac()
        b = sac_batch(rng)
        b.r = agent.q(b.s, b.a).copy()
        assert sac_critic_loss(agent, b, 0.0, np.ones(8)).value == 0.0

    def test_weight_linearity(self):
        agent, b = make_sac(), sac_batch(np.random.default_rng(1))
        nxt = fixed_next(agent, b)
        half = sac_critic_loss(agent, b, 0.99, np.full(8, 0.5), next_sample=nxt).value
        full = sac_critic_loss(agent, b, 0.99, np.full(8, 1.0), next_sample=nxt).value
        assert half / full == 0.5

    def test_unit_weights_equal_unweighted_bitwise(self):
        agent, b = make_sac(), sac_batch(np.random.default_rng(2))
        nxt = fixed_next(agent, b)
        a = sac_critic_loss(agent, b, 0.99, np.ones(8), next_sample=nxt).value
        c = sac_critic_loss(agent, b, 0.99, None, next_sample=nxt).value
        assert np.asarray(a).tobytes() == np.asarray(c).tobytes()

    def test_hand_computed_target(self):
        agent = make_sac(settings=SacSettings(hidden=(4,), init_alpha=0.2))
        rng = np.random.default_rng(3)
        b = sac_batch(rng, B=1, done_frac=0.0)
        a_next, lp_next = np.array([[0.3, -0.4]]), np.array([[-1.25]])

        def forward(net, x):
            (W0, b0), (W1, b1) = net.layers
            h = [max(0.0, sum(x[i] * W0[i, j] for i in range(len(x))) + b0[j])
                 for j in range(W0.shape[1])]
            return sum(h[j] * W1[j, 0] for j in range(len(h))) + b1[0]

        q_next = forward(agent.critic_target, list(b.s_next[0]) + list(a_next[0]))
        y = b.r[0, 0] + 0.99 * (q_next - 0.2 * -1.25)
        q = forward(agent.critic, list(b.s[0]) + list(b.a[0]))
        got = sac_critic_loss(agent, b, 0.99, next_sample=(a_next, lp_next)).value
        assert abs(got - (q - y) ** 2) < 1e-10

    def test_done_removes_bootstrap(self):
        agent = make_sac()
        b = sac_batch(np.random.default_rng(4))
        b.done[:] = 1.0
        b.r = agent.q(b.s, b.a).copy()
        assert sac_critic_loss(agent, b, 0.99).value == 0.0

    def test_non_finite_target_names_index(self):
        agent, b = make_sac(), sac_batch(np.random.default_rng(5))
        b.r[5, 0] = np.inf
        with pytest.raises(NonFiniteError, match="transition 5"):
            sac_critic_loss(agent, b, 0.99)

    @pytest.mark.parametrize("weighted", [False, True])
    def test_gradient_check(self, weighted):
        rng = np.random.default_rng(6)
        agent, b = make_sac(), sac_batch(rng, B=16)
        nxt = fixed_next(agent, b)
        w = rng.uniform(0.5, 1.0, 16) if weighted else None
        m = (rng.random(16) < 0.7).astype(float) if weighted else None
        err = grad_check(lambda t: sac_critic_loss(agent, b, 0.99, w, t, m, nxt), agent.critic)
        assert err < 1e-4

    def test_no_gradient_to_target_or_actor(self):
        agent, b = make_sac(), sac_batch(np.random.default_rng(7))
        tape = Tape()
        for p in (agent.critic, agent.critic_target, agent.actor):
            tape.watch(p)
        g = tape.backward(sac_critic_loss(agent, b, 0.99, tape=tape))
        assert np.all(g[agent.critic_target] == 0.0) and np.all(g[agent.actor] == 0.0)
        assert np.any(g[agent.critic] != 0.0)


class TestSacActor:
    def test_gradient_check(self):
        agent, b = make_sac(), sac_batch(np.random.default_rng(8))
        err = grad_check(lambda t: sac_actor_loss(agent, b.s, np.random.default_rng(1), t),
                         agent.actor)
        assert err < 1e-4

    def test_gradient_check_masked(self):
        agent, b = make_sac(), sac_batch(np.random.default_rng(9), B=16)
        m = (np.random.default_rng(2).random(16) < 0.5).astype(float)
        err = grad_check(lambda t: sac_actor_loss(agent, b.s, np.random.default_rng(1), t, m),
                         agent.actor)
        assert err < 1e-4

    def test_no_gradient_to_critic(self):
        agent, b = make_sac(), sac_batch(np.random.default_rng(10))
        tape = Tape()
        tape.watch(agent.critic)
        g = tape.backward(sac_actor_loss(agent, b.s, np.random.default_rng(0), tape))
        assert np.all(g[agent.critic] == 0.0)
        assert np.any(g[agent.actor] != 0.0)

    def test_constant_critic_zero_alpha(self):
        agent = make_sac(settings=SacSettings(hidden=(8, 8), init_alpha=1.0))
        agent.log_alpha.theta[0] = -np.inf
        W, bias = agent.critic.layers[-1]
        W[...] = 0.0
        bias[...] = 2.5
        s = sac_batch(np.random.default_rng(11)).s
        tape = Tape()
        loss = sac_actor_loss(agent, s, np.random.default_rng(0), tape)
        assert loss.value == -2.5
        assert np.all(tape.backward(loss)[agent.actor] == 0.0)

    def test_alpha_monotone(self):
        agent = make_sac(settings=SacSettings(hidden=(8, 8), init_alpha=0.1))
        _, b_out = agent.actor.layers[-1]
        b_out[agent.act_dim:] = -4.0  # narrow std, so log-probs are positive
        s = sac_batch(np.random.default_rng(12)).s
        _, lp = agent.sample(s, np.random.default_rng(0))
        assert lp.mean() > 0
        low = sac_actor_loss(agent, s, np.random.default_rng(0)).value
        agent.log_alpha.theta[0] = np.log(0.2)
        high = sac_actor_loss(agent, s, np.random.default_rng(0)).value
        assert high > low


class TestAlpha:
    def test_at_target_unchanged(self):
        agent = make_sac()
        before = agent.alpha
        alpha_update(agent, log_prob=np.full((8, 1), -agent.target_entropy))
        assert abs(agent.alpha - before) < 1e-12

    def test_low_entropy_raises_alpha(self):
        agent = make_sac()
        before = agent.alpha
        alpha_update(agent, log_prob=np.full((8, 1), 10.0))
        assert agent.alpha > before

    def test_sampled_states_path(self):
        agent, b = make_sac(), sac_batch(np.random.default_rng(13))
        assert alpha_update(agent, b.s, rng=np.random.default_rng(0)) > 0

    def test_stays_positive(self):
        agent = make_sac(settings=SacSettings(hidden=(8,)))
        for _ in range(10_000):
            alpha_update(agent, log_prob=np.full((4, 1), -1e3))
        assert agent.alpha > 0


class TestTargetSync:
    def test_hard_copy(self):
        live = MlpParams.init((3, 4, 1), np.random.default_rng(0))
        tgt = MlpParams.init((3, 4, 1), np.random.default_rng(1))
        target_sync(live, tgt, 1.0)
        assert tgt.theta.tobytes() == live.theta.tobytes()

    def test_two_steps_closed_form(self):
        live = MlpParams((2, 2), np.ones(6))
        tgt = MlpParams((2, 2), np.zeros(6))
        target_sync(live, tgt, 0.01)
        target_sync(live, tgt, 0.01)
        np.testing.assert_allclose(tgt.theta, 0.0199, rtol=0, atol=1e-15)

    @given(st.floats(1e-4, 1.0))
    @settings(max_examples=30, deadline=None)
    def test_idempotent_when_equal(self, tau):
        live = MlpParams.init((3, 4, 1), np.random.default_rng(0))
        tgt = live.copy()
        target_sync(live, tgt, tau)
        assert tgt.theta.tobytes() == live.theta.tobytes()

    def test_architecture_mismatch(self):
        with pytest.raises(DimensionError):
            target_sync(MlpParams.init((3, 4, 1), np.random.default_rng(0)),
                        MlpParams.init((3, 5, 1), np.random.default_rng(0)), 0.5)

    @pytest.mark.parametrize("tau", [0.0, 1.5])
    def test_tau_range(self, tau):
        p = MlpParams.init((2, 1), np.random.default_rng(0))
        with pytest.raises(ContractError):
            target_sync(p, p.copy(), tau)


class TestSacUpdate:
    def test_deterministic(self):
        def run():
            agent = make_sac(4)
            rng = np.random.default_rng(5)
            for _ in range(20):
                sac_update(agent, sac_batch(rng), 0.99)
            return np.concatenate([agent.critic.theta, agent.actor.theta, agent.log_alpha.theta])
        assert run().tobytes() == run().tobytes()

    def test_zero_masks_freeze_live_params(self):
        agent, b = make_sac(), sac_batch(np.random.default_rng(14))
        before = [agent.critic.theta.copy(), agent.actor.theta.copy(), agent.log_alpha.theta.copy()]
        target_before = agent.critic_target.theta.copy()
        agent.critic_target.theta += 0.01
        sac_update(agent, b, 0.99, masks=np.zeros(8))
        after = [agent.critic.theta, agent.actor.theta, agent.log_alpha.theta]
        assert all(x.tobytes() == y.tobytes() for x, y in zip(before, after))
        assert agent.critic.step == 0
        assert not np.array_equal(agent.critic_target.theta, target_before + 0.01)

    def test_critic_learns_fixed_batch(self):
        agent = make_sac(settings=SacSettings(hidden=(16, 16), lr=3e-3, learn_alpha=False))
        b = sac_batch(np.random.default_rng(15), B=16, done_frac=1.0)
        first = sac_critic_loss(agent, b, 0.99).value
        for _ in range(300):
            sac_update(agent, b, 0.99)
        assert sac_critic_loss(agent, b, 0.99).value < 0.1 * first


def dqn_agent(n_states, seed=0, **kw):
    return DqnAgent.create(n_states, 2, np.random.default_rng(seed), DqnSettings(**kw))


def chain_batch(mdp, copies=1):
    s, a, r, s2, d = exhaustive_transitions(mdp, copies)
    eye = np.eye(mdp.n_states)
    return Batch(eye[s], a, r[:, None], eye[s2], d[:, None].astype(float),
                 np.ones((len(s), 1)), np.arange(len(s)))


class TestDqn:
    def test_terminal_contribution_zero(self):
        agent = dqn_agent(3, hidden=(8,))
        eye = np.eye(3)
        q = agent.values(eye[[1]])[0, 0]
        b = Batch(eye[[1]], np.array([0]), np.array([[q]]), eye[[2]], np.ones((1, 1)),
                  np.ones((1, 1)), np.arange(1))
        assert dqn_loss(agent, b, 0.9).value == 0.0

    def test_consistent_backup(self):
        agent = dqn_agent(2, hidden=())
        W, bias = agent.q.layers[0]
        W[...] = [[10.0, 3.0], [10.0, 7.0]]
        bias[...] = 0.0
        agent.q_target.theta[:] = agent.q.theta
        eye = np.eye(2)
        b = Batch(eye[[0]], np.array([0]), np.ones((1, 1)), eye[[1]], np.zeros((1, 1)),
                  np.ones((1, 1)), np.arange(1))
        assert dqn_loss(agent, b, 0.9, np.ones(1)).value == 0.0

    def test_action_out_of_range(self):
        agent = dqn_agent(2, hidden=())
        b = chain_batch(make_chain(2))
        b.a = b.a.copy()
        b.a[0] = 2
        with pytest.raises(IndexError):
            dqn_loss(agent, b, 0.9)

    @pytest.mark.parametrize("weighted", [False, True])
    def test_gradient_check(self, weighted):
        rng = np.random.default_rng(3)
        mdp = make_chain(6, p_slip=0.5)
        b = chain_batch(mdp, 2)
        b.s = b.s + rng.normal(0, 0.1, b.s.shape)
        agent = dqn_agent(6, hidden=(8, 8))
        w = rng.uniform(0.5, 1.0, len(b)) if weighted else None
        assert grad_check(lambda t: dqn_loss(agent, b, 0.9, w, t), agent.q) < 1e-4

    def test_no_gradient_to_target(self):
        agent = dqn_agent(4, hidden=(8,))
        b = chain_batch(make_chain(4))
        tape = Tape()
        tape.watch(agent.q_target)
        g = tape.backward(dqn_loss(agent, b, 0.9, tape=tape))
        assert np.all(g[agent.q_target] == 0.0)

    @pytest.mark.parametrize("n,p_slip,copies", [(2, 0.0, 1), (5, 0.0, 1), (5, 0.2, 5),
                                                 (8, 0.25, 4), (8, 0.5, 2)])
    def test_tabular_convergence(self, n, p_slip, copies):
        mdp = make_chain(n, p_slip=p_slip, left_reward=0.05)
        b = chain_batch(mdp, copies)
        agent = dqn_agent(n, hidden=(), lr=0.01, tau=0.1)
        for _ in range(6000):
            dqn_update(agent, b, mdp.gamma)
        Q = agent.values(np.eye(n))
        assert np.max(np.abs(Q - value_iteration(mdp, tol=1e-12))) < 1e-2

    def test_zero_masks_freeze(self):
        agent = dqn_agent(4, hidden=(8,))
        b = chain_batch(make_chain(4))
        before = agent.q.theta.copy()
        dqn_update(agent, b, 0.9, masks=np.zeros(len(b)))
        assert agent.q.theta.tobytes() == before.tobytes()
