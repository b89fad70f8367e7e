import math
from dataclasses import replace

import numpy as np
import pytest

from oracles import hand_adam
from spdnn.dgp import Trajectory, simulate
from spdnn.net import Architecture, Network, mean_loss
from spdnn.optim import (
    AdamState,
    EarlyStopping,
    TrainConfig,
    TrainingDiverged,
    adam_step,
    train,
)
from spdnn.penalty import PenaltyParams, penalty_value


def linear_data(n=64, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(n, 1))
    return Trajectory(features=np.hstack([x, np.zeros((n, 1))]), targets=2.0 * x[:, 0], kind="DGP2")


class TestAdam:
    def test_zero_gradient_leaves_params(self):
        cfg = TrainConfig()
        p = np.array([0.3, -1.2, 4.0])
        state, out = adam_step(AdamState.fresh(3), p, np.zeros(3), cfg)
        np.testing.assert_array_equal(out, p)
        assert state.t == 1

    @pytest.mark.parametrize("g", [1e-4, 0.3, -2.0, 50.0])
    def test_first_step_is_signed_learning_rate(self, g):
        cfg = TrainConfig(learning_rate=0.01, epsilon=0.0)
        _, out = adam_step(AdamState.fresh(1), np.array([1.0]), np.array([g]), cfg)
        assert out[0] == pytest.approx(1.0 - 0.01 * math.copysign(1.0, g), rel=1e-14)

    def test_two_constant_steps(self):
        # with a constant gradient the bias-corrected moments are g and g^2 exactly,
        # so each step moves by lr * |g| / (|g| + eps) against the gradient sign
        cfg = TrainConfig()
        p0 = np.array([0.5, -1.0])
        g = np.array([0.3, -2.0])
        state = AdamState.fresh(2)
        state, p1 = adam_step(state, p0, g, cfg)
        state, p2 = adam_step(state, p1, g, cfg)
        expected = p0 - 2 * 1e-3 * g / (np.abs(g) + 1e-8)
        np.testing.assert_allclose(p2, expected, rtol=1e-13)
        np.testing.assert_allclose(p2, hand_adam(p0, [g, g], 1e-3, 0.9, 0.999, 1e-8)[-1], rtol=1e-13)

    def test_varying_gradients_match_hand_recursion(self):
        rng = np.random.default_rng(2)
        cfg = TrainConfig(learning_rate=0.05, beta1=0.8, beta2=0.99, epsilon=1e-6)
        p = rng.normal(size=4)
        grads = [rng.normal(size=4) for _ in range(6)]
        ref = hand_adam(p, grads, 0.05, 0.8, 0.99, 1e-6)
        state = AdamState.fresh(4)
        for g, want in zip(grads, ref):
            state, p = adam_step(state, p, g, cfg)
            np.testing.assert_allclose(p, want, rtol=1e-12)
        assert np.all(state.v >= 0)
        assert state.t == 6

    def test_out_of_place_does_not_mutate(self):
        state = AdamState.fresh(2)
        p = np.array([1.0, 2.0])
        adam_step(state, p, np.array([1.0, 1.0]), TrainConfig())
        assert state.t == 0 and not state.m.any()
        np.testing.assert_array_equal(p, [1.0, 2.0])

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            adam_step(AdamState.fresh(3), np.zeros(3), np.zeros(2), TrainConfig())


class TestConfig:
    @pytest.mark.parametrize("kw", [
        dict(learning_rate=0.0), dict(beta1=1.0), dict(beta2=-0.1), dict(patience=0),
        dict(batch_size=0), dict(loss="l1"), dict(init_scheme="glorot"), dict(monitor="valid"),
    ])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            TrainConfig(**kw)

    def test_defaults(self):
        cfg = TrainConfig()
        assert (cfg.learning_rate, cfg.batch_size, cfg.patience, cfg.max_epochs) == (1e-3, 32, 30, 1000)
        assert (cfg.beta1, cfg.beta2, cfg.epsilon) == (0.9, 0.999, 1e-8)


class TestEarlyStopping:
    def test_patience_one(self):
        es = EarlyStopping(1)
        assert es.update(1, 1.0) == (True, False)
        assert es.update(2, 1.5) == (False, True)
        assert es.best_epoch == 1

    def test_ties_do_not_count_as_improvement(self):
        es = EarlyStopping(2)
        es.update(1, 1.0)
        assert es.update(2, 1.0) == (False, False)
        assert es.update(3, 1.0) == (False, True)


class TestTrain:
    def test_fits_linear_target(self):
        data = linear_data()
        arch = Architecture(2, (8,))
        cfg = TrainConfig(learning_rate=1e-2, batch_size=16, max_epochs=600, patience=50, seed=1)
        net, hist = train(data, cfg, arch)
        assert mean_loss(net, data.features, data.targets) <= 1e-3
        assert hist.train_loss[hist.best_epoch - 1] == min(hist.train_loss)

    def test_stops_when_epoch_two_is_worse(self):
        data = linear_data()
        arch = Architecture(2, (8,))
        cfg = TrainConfig(learning_rate=0.9, batch_size=8, patience=1, max_epochs=50, seed=3)
        net, hist = train(data, cfg, arch)
        assert hist.train_loss[1] > hist.train_loss[0]  # the schedule this test relies on
        assert hist.epochs == 2
        assert hist.best_epoch == 1
        assert hist.stopped_early
        assert net.digest() == hist.checkpoints[0]

    def test_restores_best_checkpoint(self):
        data = simulate("DGP1", 120, 5)
        arch = Architecture(4, (16, 16))
        cfg = TrainConfig(learning_rate=5e-3, max_epochs=60, patience=5, seed=9,
                          penalty=PenaltyParams(1e-3, 0.05))
        net, hist = train(data, cfg, arch)
        best = int(np.argmin(hist.train_loss))
        assert hist.best_epoch == best + 1
        assert net.digest() == hist.checkpoints[best]
        assert mean_loss(net, data.features, data.targets) == hist.train_loss[best]
        assert penalty_value(net.theta, cfg.penalty) == hist.penalty[best]

    def test_deterministic(self):
        data = simulate("DGP3", 100, 2)
        arch = Architecture(2, (10, 10))
        cfg = TrainConfig(loss="hinge", max_epochs=15, seed=4, penalty=PenaltyParams(0.01, 0.1))
        a, ha = train(data, cfg, arch)
        b, hb = train(data, cfg, arch)
        assert a.theta.tobytes() == b.theta.tobytes()
        assert ha.checkpoints == hb.checkpoints

    def test_seed_changes_result(self):
        data = simulate("DGP2", 80, 2)
        arch = Architecture(2, (6,))
        a, _ = train(data, TrainConfig(max_epochs=3, seed=1), arch)
        b, _ = train(data, TrainConfig(max_epochs=3, seed=2), arch)
        assert a.digest() != b.digest()

    def test_zero_lambda_matches_unpenalized_stepwise(self):
        data = simulate("DGP1", 90, 8)
        arch = Architecture(4, (12,))
        base = TrainConfig(max_epochs=20, seed=6)
        _, h0 = train(data, base, arch)
        _, h1 = train(data, base.with_penalty(0.0, 1e-3), arch)
        assert h0.checkpoints == h1.checkpoints

    def test_penalized_objective_non_increasing_over_best_checkpoints(self):
        data = simulate("DGP1", 150, 1)
        arch = Architecture(4, (16,))
        cfg = TrainConfig(max_epochs=80, patience=10, seed=2, monitor="penalized",
                          penalty=PenaltyParams(5e-3, 0.05))
        _, hist = train(data, cfg, arch)
        obj = np.array(hist.objective())[np.array(hist.best_flag)]
        assert np.all(np.diff(obj) <= 0)

    def test_history_table(self):
        data = linear_data(20)
        _, hist = train(data, TrainConfig(max_epochs=4, seed=0), Architecture(2, (3,)))
        lines = hist.to_table().splitlines()
        assert lines[0] == "epoch,train_loss,penalty_value,monitored_best_flag"
        assert len(lines) == 5
        assert lines[1].split(",")[0] == "1" and lines[1].endswith(",1")

    def test_divergence_reports_epoch(self):
        data = linear_data(32)
        data = replace(data, targets=data.targets * 1e300)
        with pytest.raises(TrainingDiverged) as info:
            train(data, TrainConfig(max_epochs=5, seed=0), Architecture(2, (4,)))
        assert info.value.epoch == 1

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="input_dim"):
            train(linear_data(10), TrainConfig(max_epochs=1), Architecture(3, (4,)))
