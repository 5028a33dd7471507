"""Adversarial model: training loop contracts and sampling statistics."""

import numpy as np
import pytest

from edalab import gradcheck, nn
from edalab.gan import GanConfig, GanModel, PriorConfig


def snapshot(net):
    return [(l.weights.copy(), l.biases.copy()) for l in net.layers]


def unchanged(net, snap):
    return all(np.array_equal(l.weights, w) and np.array_equal(l.biases, b)
               for l, (w, b) in zip(net.layers, snap))


def build(n=10, seed=0, **kwargs):
    return GanConfig(**kwargs).build(n, np.random.default_rng(seed))


class TestConstruction:
    def test_shape_validation(self):
        rng = np.random.default_rng(0)
        gen = nn.init_network([4, 6, 8], ["relu", "sigmoid"], nn.InitSpec(), rng)
        disc = nn.init_network([9, 6, 1], ["relu", "sigmoid"], nn.InitSpec(), rng)
        with pytest.raises(ValueError):
            GanModel(gen, disc, PriorConfig(4), nn.OptimizerConfig(), nn.OptimizerConfig(), 1)

    def test_discriminator_output_must_be_sigmoid(self):
        rng = np.random.default_rng(0)
        gen = nn.init_network([4, 6, 8], ["relu", "sigmoid"], nn.InitSpec(), rng)
        disc = nn.init_network([8, 6, 1], ["relu", "linear"], nn.InitSpec(), rng)
        with pytest.raises(ValueError):
            GanModel(gen, disc, PriorConfig(4), nn.OptimizerConfig(), nn.OptimizerConfig(), 1)

    def test_prior_validation(self):
        with pytest.raises(ValueError):
            PriorConfig(0)
        with pytest.raises(ValueError):
            PriorConfig(4, "cauchy")


class TestSampling:
    def test_count_zero(self):
        model = build()
        assert model.sample(0, np.random.default_rng(1)).shape == (0, 10)

    def test_saturated_generator_emits_all_ones(self):
        model = build(init=nn.InitSpec("normal", 0.0))
        model.generator.layers[-1].biases[:] = 50.0  # sigmoid saturates to 1
        samples = model.sample(200, np.random.default_rng(2))
        assert (samples == 1).all()

    def test_zero_weight_generator_marginals(self):
        model = build(init=nn.InitSpec("normal", 0.0))
        samples = model.sample(10_000, np.random.default_rng(3))
        means = samples.mean(axis=0)
        assert ((means >= 0.47) & (means <= 0.53)).all()

    def test_sampling_deterministic_in_seed(self):
        model = build(seed=4)
        a = model.sample(64, np.random.default_rng(11))
        b = model.sample(64, np.random.default_rng(11))
        assert np.array_equal(a, b)

    def test_samples_are_binary(self):
        model = build(seed=5)
        samples = model.sample(128, np.random.default_rng(6))
        assert samples.dtype == np.uint8
        assert set(np.unique(samples)) <= {0, 1}


class TestDiscriminatorScore:
    def test_zero_weights_give_half(self):
        model = build(init=nn.InitSpec("normal", 0.0))
        assert model.discriminator_score(np.ones(10)) == 0.5

    def test_deterministic(self):
        model = build(seed=7)
        g = np.random.default_rng(8).integers(0, 2, 10)
        assert model.discriminator_score(g) == model.discriminator_score(g)

    def test_length_mismatch(self):
        model = build()
        with pytest.raises(ValueError):
            model.discriminator_score(np.ones(9))

    def test_prefers_the_training_point_across_seeds(self):
        n, wins = 8, 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            model = GanConfig(epochs=30).build(n, rng)
            model.fit(np.ones((30, n), dtype=np.uint8), rng)
            if (model.discriminator_score(np.ones(n))
                    > model.discriminator_score(np.zeros(n))):
                wins += 1
        assert wins >= 18


class TestFit:
    def test_untrained_discriminator_outputs_near_half(self):
        rng = np.random.default_rng(9)
        model = build(seed=9)
        real = rng.integers(0, 2, (100, 10)).astype(np.float64)
        fake = model.bit_probabilities(100, rng)
        for batch in (real, fake):
            scores = nn.forward(model.discriminator, batch).output
            assert abs(float(scores.mean()) - 0.5) <= 0.05

    def test_epochs_zero_is_noop(self):
        model = build(seed=10, epochs=0)
        before = snapshot(model.generator) + snapshot(model.discriminator)
        trace = model.fit(np.ones((5, 10), dtype=np.uint8), np.random.default_rng(0))
        assert unchanged(model.generator, before[:2])
        assert unchanged(model.discriminator, before[2:])
        assert trace.mean_loss_d == []

    def test_alpha_zero_keeps_parameters_bit_identical(self):
        zero = nn.OptimizerConfig(learning_rate=0.0)
        model = build(seed=11, epochs=5, optimizer_g=zero, optimizer_d=zero)
        gen_before = snapshot(model.generator)
        disc_before = snapshot(model.discriminator)
        data = np.random.default_rng(1).integers(0, 2, (20, 10)).astype(np.uint8)
        model.fit(data, np.random.default_rng(2))
        assert unchanged(model.generator, gen_before)
        assert unchanged(model.discriminator, disc_before)

    def test_discriminator_steps_never_touch_generator(self):
        # freeze G's optimizer: any G change would come from D's updates
        model = build(seed=12, epochs=3, optimizer_g=nn.OptimizerConfig(0.0))
        gen_before = snapshot(model.generator)
        disc_before = snapshot(model.discriminator)
        data = np.random.default_rng(3).integers(0, 2, (15, 10)).astype(np.uint8)
        model.fit(data, np.random.default_rng(4))
        assert unchanged(model.generator, gen_before)
        assert not unchanged(model.discriminator, disc_before)

    def test_generator_steps_never_touch_discriminator(self):
        model = build(seed=13, epochs=3, optimizer_d=nn.OptimizerConfig(0.0))
        gen_before = snapshot(model.generator)
        disc_before = snapshot(model.discriminator)
        data = np.random.default_rng(5).integers(0, 2, (15, 10)).astype(np.uint8)
        model.fit(data, np.random.default_rng(6))
        assert unchanged(model.discriminator, disc_before)
        assert not unchanged(model.generator, gen_before)

    def test_fit_deterministic_in_seed(self):
        data = np.random.default_rng(7).integers(0, 2, (20, 10)).astype(np.uint8)
        traces = []
        models = []
        for _ in range(2):
            model = build(seed=14, epochs=4)
            traces.append(model.fit(data, np.random.default_rng(15)))
            models.append(model)
        assert traces[0].mean_loss_d == traces[1].mean_loss_d
        assert traces[0].mean_loss_g == traces[1].mean_loss_g
        assert unchanged(models[0].generator, snapshot(models[1].generator))

    def test_loss_bookkeeping_recomputes_exactly(self):
        model = build(seed=16, epochs=1, record_steps=True)
        data = np.random.default_rng(8).integers(0, 2, (12, 10)).astype(np.uint8)
        trace = model.fit(data, np.random.default_rng(9))
        assert len(trace.steps) == 2 * 12
        for y, t, loss in trace.steps:
            assert loss == float(nn.cross_entropy(y, t))
        assert trace.mean_loss_d[0] == sum(s[2] for s in trace.steps) / len(trace.steps)

    def test_rejects_empty_training_set(self):
        model = build()
        with pytest.raises(ValueError):
            model.fit(np.empty((0, 10), dtype=np.uint8), np.random.default_rng(0))

    def test_trace_csv_columns(self, tmp_path):
        model = build(seed=17, epochs=2)
        data = np.random.default_rng(10).integers(0, 2, (8, 10)).astype(np.uint8)
        trace = model.fit(data, np.random.default_rng(11))
        path = tmp_path / "trace.csv"
        trace.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "epoch,mean_loss_D,mean_loss_G,mean_D_real,mean_D_fake"
        assert len(lines) == 3


class TestLearning:
    def test_generator_step_descends_its_loss(self):
        # frozen, pre-trained D: generator training must raise D(G(z))
        rng = np.random.default_rng(7)
        n = 10
        data = np.ones((50, n), dtype=np.uint8)
        model = GanConfig(epochs=5).build(n, rng)
        model.fit(data, rng)
        model.epochs_per_fit = 30
        model.optimizer_d = nn.OptimizerConfig(learning_rate=0.0)
        trace = model.fit(data, rng)
        assert trace.mean_loss_g[-1] < trace.mean_loss_g[0]
        assert trace.mean_d_fake[-1] > trace.mean_d_fake[0]

    def test_composed_generator_gradient_matches_finite_differences(self):
        assert gradcheck.check_composed_generator() <= 1e-4

    def test_learns_bernoulli_marginals(self):
        # statistical oracle: compare generator marginals to training marginals
        rng = np.random.default_rng(1)
        n = 10
        data = (rng.random((200, n)) < 0.9).astype(np.uint8)
        model = GanConfig(epochs=200).build(n, rng)
        model.fit(data, rng)
        means = model.sample(5000, rng).mean(axis=0)
        assert int((np.abs(means - 0.9) <= 0.15).sum()) >= 8
