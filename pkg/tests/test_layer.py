"""Layer rules: threshold-gated matching, reward/punish, attention, FEAST."""

import math

import numpy as np
import pytest

from odesa import Event, Layer, LayerParams


def make_layer(n_neurons=2, n_inputs=2, seed=0, **overrides):
    params = dict(
        n_neurons=n_neurons,
        n_inputs=n_inputs,
        tau_input=1.0,
        tau_trace=1.0,
        eta=0.5,
        eta_thresh=0.1,
        theta_open=0.002,
        phi=0.1,
        theta_init=0.5,
    )
    params.update(overrides)
    return Layer(LayerParams(**params), np.random.default_rng(seed))


def one_hot_layer(theta=0.5, **overrides):
    layer = make_layer(**overrides)
    layer.w = np.eye(2)
    layer.theta = np.full(2, float(theta))
    return layer


class TestForward:
    def test_one_hot_match(self):
        layer = one_hot_layer(theta=0.5)
        out = layer.forward(Event(1, 0.0))
        assert out == Event(1, 0.0)
        # context is exactly e2, so v = 1 and the threshold gap is 0.5
        assert layer.dtheta[1] == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(layer.dw[1], [0.0, 0.0], atol=1e-12)

    def test_threshold_gate_blocks_all(self):
        layer = one_hot_layer(theta=1.1)
        assert layer.forward(Event(1, 0.0)) is None

    def test_tie_goes_to_lowest_index(self):
        layer = make_layer()
        layer.w = np.array([[0.6, 0.8], [0.6, 0.8]])
        layer.theta = np.array([0.1, 0.1])
        out = layer.forward(Event(0, 0.0))
        assert out.channel == 0

    def test_at_most_one_spike_per_event(self):
        layer = make_layer(n_neurons=5, n_inputs=3, theta_init=0.0)
        rng = np.random.default_rng(1)
        t = 0.0
        for _ in range(200):
            t += float(rng.exponential(0.2))
            out = layer.forward(Event(int(rng.integers(0, 3)), t))
            assert out is None or isinstance(out, Event)

    def test_eligibility_reconstructs_context(self):
        # dW[winner] + W[winner] equals the context at the winning time
        layer = make_layer(n_neurons=3, n_inputs=4, theta_init=0.0, seed=5)
        w_before = layer.w.copy()
        layer.forward(Event(2, 1.0))
        layer.forward(Event(0, 1.5))
        out = layer.forward(Event(3, 2.0))
        assert out is not None
        ctx = layer.surface.context(2.0)
        assert np.allclose(layer.dw[out.channel] + w_before[out.channel], ctx, atol=1e-12)

    def test_winner_recorded_in_traces(self):
        layer = one_hot_layer()
        layer.forward(Event(0, 2.0))
        assert layer.traces.last_spike[0] == 2.0
        assert layer.traces.last_spike[1] == -np.inf


class TestReward:
    def test_weight_mixing_and_renormalization(self):
        # W=[1,0], stored dW=[-1,1], eta=0.5: pre-norm [0.5,0.5] -> unit diag
        layer = one_hot_layer()
        layer.dw[0] = [-1.0, 1.0]
        layer.reward(0)
        assert np.allclose(layer.w[0], [math.sqrt(0.5), math.sqrt(0.5)], atol=1e-5)

    def test_threshold_step(self):
        layer = one_hot_layer(theta=0.5)
        layer.dtheta[0] = 0.4
        layer.reward(0)
        assert layer.theta[0] == pytest.approx(0.54, abs=1e-12)

    def test_never_spiked_neuron_is_noop(self):
        layer = make_layer(seed=3)
        w = layer.w.copy()
        theta = layer.theta.copy()
        layer.reward(1)
        assert np.allclose(layer.w, w, atol=1e-12)
        assert np.array_equal(layer.theta, theta)

    def test_reward_never_decreases_theta(self):
        # the WTA gate guarantees v >= theta at a win, so dtheta >= 0
        layer = make_layer(n_neurons=4, n_inputs=6, theta_init=0.0, seed=9)
        rng = np.random.default_rng(2)
        t = 0.0
        for _ in range(500):
            t += float(rng.exponential(0.3))
            out = layer.forward(Event(int(rng.integers(0, 6)), t))
            if out is not None:
                assert layer.dtheta[out.channel] >= 0
                before = layer.theta[out.channel]
                layer.reward(out.channel)
                assert layer.theta[out.channel] >= before

    def test_theta_stays_below_one_under_win_reward_cycles(self):
        layer = make_layer(n_neurons=3, n_inputs=5, theta_init=0.9, eta_thresh=1.0, seed=11)
        rng = np.random.default_rng(4)
        t = 0.0
        for _ in range(2000):
            t += float(rng.exponential(0.1))
            out = layer.forward(Event(int(rng.integers(0, 5)), t))
            if out is not None:
                layer.reward(out.channel)
            assert (layer.theta < 1.0).all()


class TestPunish:
    def test_whole_layer(self):
        layer = one_hot_layer(theta=0.5, theta_open=0.002)
        layer.punish()
        assert np.allclose(layer.theta, [0.498, 0.498], atol=1e-12)

    def test_subset_only(self):
        layer = one_hot_layer(theta=0.5, theta_open=0.002)
        layer.punish(np.array([1]))
        assert layer.theta[0] == 0.5
        assert layer.theta[1] == pytest.approx(0.498, abs=1e-12)

    def test_weights_untouched(self):
        layer = make_layer(seed=7)
        w = layer.w.copy()
        layer.punish()
        assert np.array_equal(layer.w, w)

    def test_theta_may_go_negative(self):
        layer = one_hot_layer(theta=0.001, theta_open=0.002)
        layer.punish()
        assert (layer.theta < 0).all()
        # a negative threshold keeps the neuron eligible
        assert layer.forward(Event(0, 0.0)) is not None


class TestLocalAttention:
    def test_recent_neuron_rewarded(self):
        # spike at t - 0.1*tau gives trace exp(-0.1) ~ 0.905 >= 0.1
        layer = make_layer(tau_trace=10.0)
        layer.forward(Event(0, 0.0))
        winner = 0 if layer.traces.last_spike[0] == 0.0 else 1
        theta_before = layer.theta.copy()
        layer.record_local_attention(1.0)
        assert layer.theta[winner] >= theta_before[winner]

    def test_stale_neuron_punished(self):
        layer = one_hot_layer(theta=0.5)
        layer.forward(Event(0, 0.0))  # neuron 0 wins; neuron 1 never spiked
        layer.record_local_attention(0.0)
        assert layer.theta[1] == pytest.approx(0.498, abs=1e-12)

    def test_spike_exactly_at_signal_time_rewarded(self):
        layer = one_hot_layer(theta=0.5)
        layer.forward(Event(0, 1.0))
        layer.record_local_attention(1.0)
        # trace 1.0 >= phi, and the stored gap was 0.5
        assert layer.theta[0] == pytest.approx(0.5 + 0.1 * 0.5, abs=1e-12)

    def test_matches_sequential_reward_punish(self):
        layer = make_layer(n_neurons=6, n_inputs=4, theta_init=0.0, seed=13)
        twin = make_layer(n_neurons=6, n_inputs=4, theta_init=0.0, seed=13)
        rng = np.random.default_rng(5)
        t = 0.0
        for _ in range(50):
            t += float(rng.exponential(0.5))
            ev = Event(int(rng.integers(0, 4)), t)
            layer.forward(ev)
            twin.forward(ev)
        layer.record_local_attention(t)
        recent = twin.traces.read(t) >= twin.params.phi
        for n in range(6):
            if recent[n]:
                twin.reward(n)
            else:
                twin.punish(n)
        assert np.allclose(layer.w, twin.w, atol=1e-12)
        assert np.allclose(layer.theta, twin.theta, atol=1e-12)


class TestFeast:
    def test_no_winner_lowers_every_threshold(self):
        layer = one_hot_layer(theta=1.1, feast_delta=0.01)
        out = layer.feast_step(Event(0, 0.0))
        assert out is None
        assert np.allclose(layer.theta, [1.09, 1.09], atol=1e-12)

    def test_winner_updates_only_winner(self):
        layer = one_hot_layer(theta=0.5, feast_delta=0.01)
        out = layer.feast_step(Event(0, 0.0))
        assert out.channel == 0
        assert layer.theta[0] == pytest.approx(0.51, abs=1e-12)
        assert layer.theta[1] == 0.5
        assert np.allclose(layer.w[1], [0.0, 1.0], atol=1e-12)

    def test_repeated_pattern_converges_to_its_context(self):
        layer = make_layer(n_neurons=2, n_inputs=3, seed=21, theta_init=0.0,
                           eta=0.2, feast_delta=1e-6)
        # one fixed pattern far apart in time, so each presentation has the
        # same (one-hot) context
        winner = None
        for rep in range(200):
            out = layer.feast_step(Event(1, rep * 100.0))
            assert out is not None
            winner = out.channel
        assert np.allclose(layer.w[winner], [0.0, 1.0, 0.0], atol=1e-6)


class TestInvariants:
    def test_unit_norm_after_random_ops(self):
        layer = make_layer(n_neurons=8, n_inputs=12, theta_init=0.0, seed=17,
                           eta=0.3, eta_thresh=0.2)
        rng = np.random.default_rng(23)
        t = 0.0
        for _ in range(3000):
            op = rng.integers(0, 3)
            if op == 0:
                t += float(rng.exponential(0.2))
                layer.forward(Event(int(rng.integers(0, 12)), t))
            elif op == 1:
                layer.reward(int(rng.integers(0, 8)))
            else:
                layer.punish()
        norms = np.linalg.norm(layer.w, axis=1)
        assert np.allclose(norms, 1.0, atol=1e-9)

    def test_nonnegative_under_fresh_win_reward_cycles(self):
        # rewarding right after the win mixes two non-negative unit vectors,
        # so entries stay non-negative; stale eligibility offers no such
        # guarantee and is exercised above for the norm invariant only
        layer = make_layer(n_neurons=8, n_inputs=12, theta_init=0.0, seed=17,
                           eta=0.9, eta_thresh=0.2)
        rng = np.random.default_rng(29)
        t = 0.0
        for _ in range(2000):
            t += float(rng.exponential(0.2))
            out = layer.forward(Event(int(rng.integers(0, 12)), t))
            if out is not None:
                layer.reward(out.channel)
            assert (layer.w >= 0).all()

    def test_reset_keeps_parameters(self):
        layer = make_layer(seed=2)
        layer.forward(Event(0, 1.0))
        w, theta = layer.w.copy(), layer.theta.copy()
        layer.reset_dynamic_state()
        assert np.array_equal(layer.w, w)
        assert np.array_equal(layer.theta, theta)
        assert (layer.dw == 0).all() and (layer.dtheta == 0).all()
        assert (layer.traces.last_spike == -np.inf).all()

    def test_state_dict_round_trip(self):
        layer = make_layer(seed=31)
        layer.forward(Event(1, 0.5))
        layer.reward(layer.traces.last_spike.argmax())
        other = make_layer(seed=99)
        other.load_state_dict(layer.state_dict())
        assert np.array_equal(other.w, layer.w)
        assert np.array_equal(other.theta, layer.theta)
