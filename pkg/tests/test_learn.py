import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from starcache.learn import (
    Adam,
    DqnAgent,
    DqnConfig,
    Mlp,
    ReplayBuffer,
    Td3Agent,
    Td3Config,
    hard_update,
    mlp_sizes,
    noise_scale,
    soft_update,
)


def finite_difference_check(net, x, g_out, h=1e-6):
    """Largest relative error between analytic and central-difference gradients of <g_out, net(x)>."""
    net(x)
    grads = net.backward(g_out)
    worst = 0.0
    for p, g in zip(net.params, grads):
        flat = p.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            up = float(np.sum(net(x) * g_out))
            flat[i] = old - h
            dn = float(np.sum(net(x) * g_out))
            flat[i] = old
            fd = (up - dn) / (2 * h)
            worst = max(worst, abs(fd - g.reshape(-1)[i]) / max(1e-6, abs(fd) + abs(g.reshape(-1)[i])))
    return worst


class TestMlp:
    def test_zero_network(self):
        net = Mlp([3, 4, 2], "linear", np.random.default_rng(0))
        for p in net.params:
            p[...] = 0
        np.testing.assert_array_equal(net(np.ones(3)), np.zeros(2))

    def test_identity_layer(self):
        net = Mlp([5, 5], "linear", np.random.default_rng(0))
        net.params[0][...] = np.eye(5)
        net.params[1][...] = 0
        x = np.arange(5.0)
        np.testing.assert_array_equal(net(x), x)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            Mlp([3, 2], "linear", np.random.default_rng(0))(np.ones(4))

    @pytest.mark.parametrize("out_act", ["tanh", "linear"])
    def test_gradients_small(self, out_act):
        rng = np.random.default_rng(1)
        net = Mlp([6, 5, 5, 3], out_act, rng)
        x = rng.standard_normal((4, 6))
        assert finite_difference_check(net, x, rng.standard_normal((4, 3))) < 1e-6

    def test_input_gradient(self):
        rng = np.random.default_rng(2)
        net = Mlp([4, 8, 1], "linear", rng)
        x = rng.standard_normal((1, 4))
        net(x)
        net.backward(np.ones((1, 1)))
        gi = net.grad_input.copy()
        for j in range(4):
            e = np.zeros_like(x)
            e[0, j] = 1e-6
            fd = (net(x + e)[0, 0] - net(x - e)[0, 0]) / 2e-6
            assert gi[0, j] == pytest.approx(fd, rel=1e-5, abs=1e-9)

    def test_zero_upstream_gradient(self):
        rng = np.random.default_rng(3)
        net = Mlp(mlp_sizes(5, 2), "tanh", rng)
        net(rng.standard_normal(5))
        assert all(np.all(g == 0) for g in net.backward(np.zeros(2)))

    def test_gradient_linearity(self):
        rng = np.random.default_rng(4)
        net = Mlp([3, 7, 2], "tanh", rng)
        x = rng.standard_normal((5, 3))
        g1, g2 = rng.standard_normal((2, 5, 2))
        net(x)
        a = net.backward(g1)
        b = net.backward(g2)
        c = net.backward(g1 + g2)
        for pa, pb, pc in zip(a, b, c):
            np.testing.assert_allclose(pa + pb, pc, rtol=1e-12, atol=1e-14)

    def test_backward_before_forward(self):
        with pytest.raises(RuntimeError):
            Mlp([2, 2], "linear", np.random.default_rng(0)).backward(np.ones(2))

    def test_default_architecture(self):
        assert mlp_sizes(213, 81) == [213, 64, 64, 64, 81]

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30)
    def test_bounded_input_gives_finite_output(self, seed):
        rng = np.random.default_rng(seed)
        net = Mlp(mlp_sizes(20, 5), "tanh", rng)
        y = net(rng.uniform(-1e3, 1e3, (3, 20)))
        assert np.all(np.isfinite(y)) and np.all(np.abs(y) <= 1)


class TestAdam:
    def test_zero_gradient(self):
        p = [np.array([1.0, -2.0])]
        opt = Adam(p, lr=0.1)
        opt.step([np.zeros(2)])
        np.testing.assert_array_equal(p[0], [1.0, -2.0])
        assert opt.t == 1

    def test_constant_gradient_moves_by_lr(self):
        p = [np.zeros(3)]
        opt = Adam(p, lr=1e-3)
        g = np.array([5.0, -0.01, 2e3])
        prev = p[0].copy()
        for _ in range(200):
            opt.step([g])
            step = p[0] - prev
            prev = p[0].copy()
            # with bias correction, m_hat = g and v_hat = g^2 exactly
            np.testing.assert_allclose(step, -1e-3 * np.sign(g), rtol=1e-6)

    def test_deterministic(self):
        out = []
        for _ in range(2):
            rng = np.random.default_rng(5)
            net = Mlp([3, 4, 1], "linear", rng)
            opt = Adam(net.params, 1e-2)
            for _ in range(20):
                net(rng.standard_normal((8, 3)))
                opt.step(net.backward(rng.standard_normal((8, 1))))
            out.append(np.concatenate([p.ravel() for p in net.params]))
        np.testing.assert_array_equal(out[0], out[1])


class TestSoftUpdate:
    def _pair(self, src_val, tgt_val):
        rng = np.random.default_rng(0)
        src = Mlp([2, 2], "linear", rng)
        tgt = src.copy()
        for p in src.params:
            p[...] = src_val
        for p in tgt.params:
            p[...] = tgt_val
        return src, tgt

    @pytest.mark.parametrize("tau, expected", [(1.0, 2.0), (0.0, 0.0), (0.5, 1.0)])
    def test_values(self, tau, expected):
        src, tgt = self._pair(2.0, 0.0)
        soft_update(tgt, src, tau)
        assert all(np.all(p == expected) for p in tgt.params)

    @given(st.floats(0.0, 1.0))
    def test_contraction(self, tau):
        rng = np.random.default_rng(1)
        src = Mlp([3, 4, 2], "linear", rng)
        tgt = Mlp([3, 4, 2], "linear", rng)
        d0 = np.sqrt(sum(np.sum((a - b) ** 2) for a, b in zip(tgt.params, src.params)))
        soft_update(tgt, src, tau)
        d1 = np.sqrt(sum(np.sum((a - b) ** 2) for a, b in zip(tgt.params, src.params)))
        assert d1 == pytest.approx((1 - tau) * d0, rel=1e-9, abs=1e-12)

    def test_hard_update(self):
        src, tgt = self._pair(3.0, -1.0)
        hard_update(tgt, src)
        assert all(np.all(p == 3.0) for p in tgt.params)


class TestReplay:
    def test_overwrites_oldest(self):
        buf = ReplayBuffer(5, 1, 1)
        for i in range(8):
            buf.push([i], [i], i, [i])
        assert len(buf) == 5
        assert sorted(buf.r[:5].tolist()) == [3, 4, 5, 6, 7]

    def test_batch_without_replacement(self):
        buf = ReplayBuffer(100, 2, 1)
        for i in range(40):
            buf.push([i, -i], [0.5], float(i), [i + 1, 0])
        s, a, r, s2 = buf.sample(32, np.random.default_rng(0))
        assert len(set(r.tolist())) == 32
        np.testing.assert_array_equal(s[:, 0], r)

    def test_empty_and_small(self):
        buf = ReplayBuffer(10, 1, 1)
        rng = np.random.default_rng(0)
        assert buf.sample(4, rng) is None
        buf.push([0], [0], 1.0, [0])
        assert len(buf.sample(4, rng)[2]) == 1

    def test_grows_past_initial_allocation(self):
        buf = ReplayBuffer(3000, 1, 1, np.int64)
        for i in range(2500):
            buf.push([i], [i], i, [i])
        assert buf.a.dtype == np.int64 and buf.a[2499, 0] == 2499


class TestTd3:
    def _agent(self, **kw):
        cfg = Td3Config(hidden=8, n_hidden=2, **kw)
        return Td3Agent(3, 2, cfg, np.random.default_rng(0))

    def test_noise_schedule(self):
        cfg = Td3Config(max_episode=100)
        assert noise_scale(0, cfg) == 0.4
        assert noise_scale(100, cfg) == pytest.approx(0.2)
        vals = [noise_scale(e, cfg) for e in range(101)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_zero_noise_is_policy(self):
        ag = self._agent(noise_start=0.0, noise_end=0.0)
        s = np.array([0.1, -0.3, 0.7])
        np.testing.assert_array_equal(ag.act(s, 0), ag.actor(s))

    def test_actions_clipped(self):
        ag = self._agent(noise_start=5.0)
        for _ in range(50):
            a = ag.act(np.ones(3), 0)
            assert np.all(np.abs(a) <= 1.0)

    def test_noise_variance(self):
        ag = self._agent(max_episode=10)
        ag.episode = 5
        s = np.zeros(3)
        mu = ag.actor(s)
        # the actor output stays near zero here, so clipping at +-1 barely matters
        draws = np.array([ag.act(s, 0) for _ in range(10_000)]) - mu
        assert np.var(draws) == pytest.approx(0.3**2, rel=0.05)

    def test_greedy_after_threshold(self):
        ag = self._agent(t_o=10)
        s = np.array([0.2, 0.1, -0.4])
        np.testing.assert_array_equal(ag.act(s, 11), ag.greedy(s))
        np.testing.assert_array_equal(ag.greedy(s), ag.actor(s))  # online and target agree at init

    def test_label_gamma_zero(self):
        ag = self._agent(gamma=0.0)
        r = np.array([1.5, -2.0])
        np.testing.assert_array_equal(ag.target_values(r, np.zeros((2, 3))), r)

    def test_label_by_hand(self):
        ag = self._agent(gamma=0.9, noise_start=0.0, noise_end=0.0)
        s2 = np.array([[0.3, -0.2, 0.5]])
        a2 = ag.actor_t(s2)
        q1 = ag.critic1_t(np.concatenate([s2, a2], axis=1))[0, 0]
        q2 = ag.critic2_t(np.concatenate([s2, a2], axis=1))[0, 0]
        assert ag.target_values(np.array([0.7]), s2)[0] == pytest.approx(0.7 + 0.9 * min(q1, q2), rel=1e-14)

    def test_identical_critics_label(self):
        ag = self._agent(gamma=0.5, noise_start=0.0, noise_end=0.0)
        hard_update(ag.critic2_t, ag.critic1_t)
        s2 = np.random.default_rng(1).standard_normal((4, 3))
        q = ag.critic1_t(np.concatenate([s2, ag.actor_t(s2)], axis=1))[:, 0]
        np.testing.assert_allclose(ag.target_values(np.ones(4), s2), 1 + 0.5 * q, rtol=1e-14)

    def test_policy_delay_count(self):
        ag = self._agent(policy_delay=3)
        rng = np.random.default_rng(2)
        for n in range(1, 11):
            batch = (rng.standard_normal((4, 3)), rng.uniform(-1, 1, (4, 2)), rng.standard_normal(4),
                     rng.standard_normal((4, 3)))
            ag.learn(batch)
            assert ag.actor_updates == n // 3
        assert ag.learn(None) == {}

    def test_learns_bandit(self):
        """A one-step problem with reward -(a - 0.5)^2 drives the actor towards 0.5."""
        cfg = Td3Config(gamma=0.0, hidden=16, n_hidden=2, lr=3e-3, policy_delay=2, tau=0.05)
        ag = Td3Agent(1, 1, cfg, np.random.default_rng(3))
        rng = np.random.default_rng(4)
        buf = ReplayBuffer(5000, 1, 1)
        for t in range(3000):
            s = np.array([1.0])
            a = ag.act(s, t)
            buf.push(s, a, -(a[0] - 0.5) ** 2, s)
            ag.learn(buf.sample(64, rng))
        assert ag.actor(np.array([1.0]))[0] == pytest.approx(0.5, abs=0.1)


class TestDqn:
    def test_greedy_with_zero_epsilon(self):
        ag = DqnAgent(3, 4, DqnConfig(hidden=8, n_hidden=1), np.random.default_rng(0))
        s = np.array([0.1, 0.2, 0.3])
        best = int(np.argmax(ag.qnet(s)))
        assert all(ag.act(s, train=True, epsilon=0.0) == best for _ in range(20))
        assert ag.act(s, train=False, epsilon=1.0) == best

    def test_single_action(self):
        ag = DqnAgent(2, 1, DqnConfig(hidden=4, n_hidden=1), np.random.default_rng(0))
        assert ag.act(np.zeros(2), train=True, epsilon=1.0) == 0

    def test_uniform_exploration(self):
        ag = DqnAgent(2, 4, DqnConfig(hidden=4, n_hidden=1), np.random.default_rng(1))
        picks = np.bincount([ag.act(np.zeros(2), train=True, epsilon=1.0) for _ in range(10_000)], minlength=4)
        sigma = np.sqrt(10_000 * 0.25 * 0.75)
        assert np.all(np.abs(picks - 2500) <= 3 * sigma)

    def test_too_many_heads(self):
        with pytest.raises(ValueError):
            DqnAgent(2, 2**13, DqnConfig(), np.random.default_rng(0))

    def test_loss_zero_iff_labels_match(self):
        ag = DqnAgent(2, 3, DqnConfig(hidden=4, n_hidden=1, lr=0.0), np.random.default_rng(0))
        s = np.array([[0.5, -0.5], [1.0, 0.0]])
        a = np.array([[2], [0]])
        q = ag.qnet(s)
        assert ag.learn((s, a, q[[0, 1], [2, 0]], s)) == pytest.approx(0.0, abs=1e-30)
        assert ag.learn((s, a, q[[0, 1], [2, 0]] + 1.0, s)) == pytest.approx(1.0)
        assert ag.learn(None) is None

    def test_chain_matches_value_iteration(self):
        """Two states, two actions, deterministic transitions, discount 0.5."""
        P = np.array([[1, 0], [0, 1]])      # next state index for (state, action)
        R = np.array([[0.0, 1.0], [2.0, 0.0]])
        gamma = 0.5
        Q = np.zeros((2, 2))
        for _ in range(200):
            Q = R + gamma * Q.max(axis=1)[P]
        ag = DqnAgent(2, 2, DqnConfig(gamma=gamma, lr=1e-2, hidden=16, n_hidden=1, batch_size=4),
                      np.random.default_rng(0))
        eye = np.eye(2)
        s = np.repeat(eye, 2, axis=0)
        a = np.array([[0], [1], [0], [1]])
        r = R.reshape(-1)
        s2 = eye[P.reshape(-1)]
        for it in range(6000):
            ag.learn((s, a, r, s2))
            if it % 20 == 0:
                ag.sync_target()
        np.testing.assert_allclose(ag.qnet(eye), Q, atol=1e-2)
