"""Denoising autoencoder: reconstruction training and chain sampling."""

import numpy as np
import pytest

from edalab import nn
from edalab.dae import DaeConfig, DaeModel, corrupt


def build(n=10, seed=0, **kwargs):
    return DaeConfig(**kwargs).build(n, np.random.default_rng(seed))


def snapshot(net):
    return [(l.weights.copy(), l.biases.copy()) for l in net.layers]


def unchanged(net, snap):
    return all(np.array_equal(l.weights, w) and np.array_equal(l.biases, b)
               for l, (w, b) in zip(net.layers, snap))


class TestCorruption:
    def test_rate_zero_is_identity(self):
        x = np.random.default_rng(0).integers(0, 2, (5, 8)).astype(np.float64)
        assert corrupt(x, 0.0, np.random.default_rng(1)) is x

    def test_rate_flips_expected_fraction(self):
        rng = np.random.default_rng(2)
        x = np.ones((200, 50))
        noisy = corrupt(x, 0.4, rng)
        # half of the corrupted bits keep their value (uniform reset)
        changed = float((noisy != x).mean())
        assert 0.17 <= changed <= 0.23


class TestConstruction:
    def test_requires_matching_in_out(self):
        rng = np.random.default_rng(0)
        net = nn.init_network([8, 4, 6], ["relu", "sigmoid"], nn.InitSpec(), rng)
        with pytest.raises(ValueError):
            DaeModel(net, 0.1, 1, nn.OptimizerConfig(), 1)

    def test_requires_sigmoid_output(self):
        rng = np.random.default_rng(0)
        net = nn.init_network([8, 4, 8], ["relu", "linear"], nn.InitSpec(), rng)
        with pytest.raises(ValueError):
            DaeModel(net, 0.1, 1, nn.OptimizerConfig(), 1)

    def test_rejects_bad_rates(self):
        rng = np.random.default_rng(0)
        net = nn.init_network([8, 4, 8], ["relu", "sigmoid"], nn.InitSpec(), rng)
        with pytest.raises(ValueError):
            DaeModel(net, 1.0, 1, nn.OptimizerConfig(), 1)
        with pytest.raises(ValueError):
            DaeModel(net, 0.1, 1, nn.OptimizerConfig(), 1, sampling_corruption=1.0)


class TestFit:
    def test_zero_rho_zero_alpha_leaves_parameters(self):
        model = build(seed=1, rho=0.0, epochs=5,
                      optimizer=nn.OptimizerConfig(learning_rate=0.0))
        before = snapshot(model.net)
        data = np.random.default_rng(2).integers(0, 2, (20, 10)).astype(np.uint8)
        model.fit(data, np.random.default_rng(3))
        assert unchanged(model.net, before)

    def test_memorizes_point_mass(self):
        rng = np.random.default_rng(3)
        target = rng.integers(0, 2, 10).astype(np.uint8)
        model = DaeConfig(hidden=20, epochs=200).build(10, rng)
        model.fit(np.tile(target, (50, 1)), rng)
        recon = model.reconstruct(target[None, :])[0]
        assert (np.abs(recon - target) < 0.1).all()

    def test_trace_is_finite_everywhere(self):
        rng = np.random.default_rng(4)
        model = build(seed=4, epochs=20)
        data = rng.integers(0, 2, (30, 10)).astype(np.uint8)
        trace = model.fit(data, rng)
        assert len(trace.mean_reconstruction_loss) == 20
        assert all(np.isfinite(v) for v in trace.mean_reconstruction_loss)

    def test_deterministic_in_seed(self):
        data = np.random.default_rng(5).integers(0, 2, (20, 10)).astype(np.uint8)
        nets = []
        for _ in range(2):
            model = build(seed=6, epochs=5)
            model.fit(data, np.random.default_rng(7))
            nets.append(model.net)
        assert unchanged(nets[0], snapshot(nets[1]))

    def test_rejects_empty_training_set(self):
        with pytest.raises(ValueError):
            build().fit(np.empty((0, 10), dtype=np.uint8), np.random.default_rng(0))

    def test_trace_csv_columns(self, tmp_path):
        rng = np.random.default_rng(8)
        model = build(seed=8, epochs=3)
        trace = model.fit(rng.integers(0, 2, (10, 10)).astype(np.uint8), rng)
        path = tmp_path / "trace.csv"
        trace.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "epoch,mean_reconstruction_loss"
        assert len(lines) == 4


class TestSampling:
    def test_chain_steps_zero_returns_seeds(self):
        model = build(seed=9, chain_steps=0)
        seeds = np.random.default_rng(10).integers(0, 2, (7, 10)).astype(np.uint8)
        out = model.sample_chain(7, seeds, np.random.default_rng(11))
        assert np.array_equal(out, seeds)
        out = model.sample_chain(10, seeds, np.random.default_rng(11))
        assert np.array_equal(out, seeds[np.arange(10) % 7])  # seeds are cycled

    def test_untrained_zero_weight_net_gives_uniform_bits(self):
        model = build(seed=12, init=nn.InitSpec("normal", 0.0), chain_steps=1)
        seeds = np.zeros((1, 10), dtype=np.uint8)
        samples = model.sample_chain(10_000, seeds, np.random.default_rng(13))
        means = samples.mean(axis=0)
        assert ((means >= 0.47) & (means <= 0.53)).all()

    def test_trained_chain_concentrates_near_point_mass(self):
        rng = np.random.default_rng(3)
        target = rng.integers(0, 2, 10).astype(np.uint8)
        model = DaeConfig(hidden=20, epochs=200, chain_steps=5).build(10, rng)
        model.fit(np.tile(target, (50, 1)), rng)
        samples = model.sample_chain(1000, np.zeros((1, 10), dtype=np.uint8),
                                     np.random.default_rng(14))
        hamming = (samples != target).sum(axis=1)
        assert float((hamming <= 1).mean()) >= 0.9

    def test_sample_uses_fit_seeds(self):
        model = build(seed=15, epochs=1)
        with pytest.raises(ValueError):
            model.sample(5, np.random.default_rng(16))
        data = np.random.default_rng(17).integers(0, 2, (12, 10)).astype(np.uint8)
        model.fit(data, np.random.default_rng(18))
        assert model.sample(24, np.random.default_rng(19)).shape == (24, 10)

    def test_noiseless_chain_is_deterministic_map_plus_draws(self):
        rng = np.random.default_rng(20)
        model = build(seed=20, epochs=10, sample_rho=0.0, chain_steps=1)
        data = rng.integers(0, 2, (20, 10)).astype(np.uint8)
        model.fit(data, rng)
        seeds = data[:4]
        # identical per-bit probabilities on every call with the same input
        p1 = model.reconstruct(seeds)
        p2 = model.reconstruct(seeds)
        assert np.array_equal(p1, p2)
        a = model.sample_chain(4, seeds, np.random.default_rng(21))
        b = model.sample_chain(4, seeds, np.random.default_rng(21))
        assert np.array_equal(a, b)

    def test_samples_are_binary_genotypes(self):
        rng = np.random.default_rng(22)
        model = build(seed=22, epochs=2)
        data = rng.integers(0, 2, (10, 10)).astype(np.uint8)
        model.fit(data, rng)
        samples = model.sample(50, rng)
        assert samples.dtype == np.uint8
        assert set(np.unique(samples)) <= {0, 1}
