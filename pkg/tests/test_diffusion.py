import numpy as np
import pytest

from lidarsynth.diffusion import (GaussianScoreModel, IdentityCodec, Latent,
                                  NoiseSchedule, ScoreModel, cfg_score,
                                  forward_diffuse, langevin_step, sample_euler,
                                  sample_langevin, score_matching_loss)
from lidarsynth.geometry import Plane, analytic_sdf


def gauss_model(dim=8, mu_c=2.0, mu_u=0.0, var=1.0):
    return GaussianScoreModel({1: np.full(dim, mu_c)}, np.full(dim, mu_u), var)


class TestSchedule:
    def test_geometric_shape(self):
        s = NoiseSchedule.geometric(K=50, sigma_max=5.0, sigma_min=0.05, eta=0.2)
        assert s.K == 50
        assert s.sigma(50) == pytest.approx(5.0)
        assert s.sigma(1) == pytest.approx(0.05)
        assert s.lam(10) == pytest.approx(0.2 * s.sigma(10) ** 2)

    def test_invalid_rejected(self):
        with pytest.raises(ValueError):
            NoiseSchedule(np.array([1.0, 0.5]), np.array([0.1, 0.1]))
        with pytest.raises(ValueError):
            NoiseSchedule(np.array([0.5, 1.0]), np.array([0.1, -0.1]))

    def test_level_bounds(self):
        s = NoiseSchedule.geometric(K=10)
        with pytest.raises(ValueError):
            s.sigma(0)
        with pytest.raises(ValueError):
            s.sigma(11)


class TestCfgScore:
    def test_w_zero_equals_conditional(self):
        m = gauss_model()
        z = Latent(np.linspace(-1, 1, 8))
        out = cfg_score(m, z, 5, 1, 0.0)
        assert np.array_equal(out.values, m.evaluate(z, 5, 1).values)

    def test_gaussian_closed_form(self):
        # (1+w) s_c - w s_u equals the score of N((1+w)mu_c - w mu_u, var)
        m = gauss_model(mu_c=2.0, mu_u=-1.0, var=0.5)
        z = Latent(np.linspace(-2, 2, 8))
        w = 0.7
        out = cfg_score(m, z, 3, 1, w)
        mu_eff = (1 + w) * 2.0 - w * (-1.0)
        expected = -(z.values - mu_eff) / 0.5
        assert np.abs(out.values - expected).max() < 1e-12

    def test_equal_branches_cancel_w(self):
        m = gauss_model(mu_c=0.5, mu_u=0.5)
        z = Latent(np.ones(8))
        a = cfg_score(m, z, 1, 1, 0.0)
        b = cfg_score(m, z, 1, 1, 5.0)
        assert np.abs(a.values - b.values).max() < 1e-12

    def test_missing_condition_rejected(self):
        with pytest.raises(ValueError):
            cfg_score(gauss_model(), Latent(np.zeros(8)), 1, None, 0.5)

    def test_linear_in_w(self):
        m = gauss_model(mu_c=1.5, mu_u=-0.5)
        z = Latent(np.linspace(0, 1, 8))
        w1, w2 = 0.3, 1.1
        lhs = (cfg_score(m, z, 2, 1, w1).values + cfg_score(m, z, 2, 1, w2).values
               - cfg_score(m, z, 2, 1, 0.0).values)
        rhs = cfg_score(m, z, 2, 1, w1 + w2).values
        assert np.abs(lhs - rhs).max() < 1e-9


class TestLangevinStep:
    def test_zero_steps_size_limit(self):
        z = Latent(np.ones(4))
        s = Latent(np.full(4, 2.0))
        out = langevin_step(z, s, 1e-12, rng=None)
        assert np.abs(out.values - z.values).max() < 1e-11

    def test_deterministic_mode_arithmetic(self):
        z = Latent(np.array([1.0, -1.0]))
        s = Latent(np.array([4.0, 2.0]))
        out = langevin_step(z, s, 0.5, rng=None)
        assert np.array_equal(out.values, [1.0 + 0.25 * 4.0, -1.0 + 0.25 * 2.0])

    def test_noise_variance(self):
        lam = 0.3
        rng = np.random.default_rng(0)
        z = Latent(np.zeros(100_000))
        out = langevin_step(z, Latent(np.zeros(100_000)), lam, rng)
        var = out.values.var()
        se = lam * np.sqrt(2.0 / (100_000 - 1))
        assert abs(var - lam) < 3 * se


class TestSamplers:
    def test_langevin_cfg_gaussian_stats(self):
        model = gauss_model(dim=8, mu_c=2.0, mu_u=0.0)
        sched = NoiseSchedule.geometric()
        rng = np.random.default_rng(42)
        z = sample_langevin(model, sched, 1, 0.5, 5, rng, shape=(2000, 8))
        mean = z.values.mean(axis=0)
        var = z.values.var(axis=0)
        assert np.abs(mean - 3.0).max() < 0.15
        assert np.abs(var - 1.0).max() < 0.2

    def test_langevin_unconditional_stationary(self):
        model = gauss_model(dim=8, mu_c=0.0, mu_u=0.0)
        sched = NoiseSchedule.geometric()
        rng = np.random.default_rng(1)
        z = sample_langevin(model, sched, None, 0.0, 5, rng, shape=(2000, 8))
        assert np.abs(z.values.mean(axis=0)).max() < 0.1
        assert np.abs(z.values.var(axis=0) - 1.0).max() < 0.1

    def test_langevin_marginals_pass_ks(self):
        from scipy import stats
        model = gauss_model(dim=4, mu_c=2.0, mu_u=0.0)
        sched = NoiseSchedule.geometric()
        rng = np.random.default_rng(77)
        z = sample_langevin(model, sched, 1, 0.5, 5, rng, shape=(2000, 4))
        # each marginal should look like N(3, 1)
        for j in range(4):
            p = stats.kstest(z.values[:, j], "norm", args=(3.0, 1.0)).pvalue
            assert p > 0.01

    def test_langevin_deterministic_given_seed(self):
        model = gauss_model()
        sched = NoiseSchedule.geometric(K=20)
        a = sample_langevin(model, sched, 1, 0.5, 3,
                            np.random.default_rng(7), shape=(4, 8))
        b = sample_langevin(model, sched, 1, 0.5, 3,
                            np.random.default_rng(7), shape=(4, 8))
        assert np.array_equal(a.values, b.values)

    def test_euler_reaches_conditional_mean(self):
        model = gauss_model(dim=8, mu_c=2.0)
        sched = NoiseSchedule.geometric()
        z = sample_euler(model, sched, 1, 0.0, np.random.default_rng(3),
                         shape=(2000, 8))
        assert np.abs(z.values.mean(axis=0) - 2.0).max() < 0.15

    def test_euler_single_step_by_hand(self):
        model = gauss_model(dim=4, mu_c=1.0, var=2.0)
        sched = NoiseSchedule(np.array([0.5]), np.array([0.1]))
        rng = np.random.default_rng(11)
        z0 = 0.5 * np.random.default_rng(11).standard_normal((4,))
        expected = z0 + (0.5 - 0.0) * 0.5 * (-(z0 - 1.0) / 2.0)
        out = sample_euler(model, sched, 1, 0.0, rng, shape=(4,))
        assert np.abs(out.values - expected).max() < 1e-12

    def test_euler_zero_score_returns_noise(self):
        class ZeroModel(ScoreModel):
            convention = "score"

            def evaluate(self, z, k, cond=None):
                return Latent(np.zeros(z.shape))

        sched = NoiseSchedule.geometric(K=10)
        init = sched.sigma(10) * np.random.default_rng(5).standard_normal((6,))
        out = sample_euler(ZeroModel(), sched, None, 0.0,
                           np.random.default_rng(5), shape=(6,))
        assert np.array_equal(out.values, init)


class TestForwardDiffuse:
    def test_level_bounds(self):
        sched = NoiseSchedule.geometric(K=10)
        z0 = Latent(np.zeros(4))
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            forward_diffuse(z0, 0, sched, rng)
        with pytest.raises(ValueError):
            forward_diffuse(z0, 11, sched, rng)

    def test_noise_magnitude(self):
        sched = NoiseSchedule.geometric(K=10, sigma_max=2.0, sigma_min=0.1)
        z0 = Latent(np.full(50_000, 3.0))
        rng = np.random.default_rng(2)
        z5 = forward_diffuse(z0, 5, sched, rng)
        sigma = sched.sigma(5)
        mse = np.mean((z5.values - z0.values) ** 2)
        assert mse == pytest.approx(sigma ** 2, rel=0.05)
        assert z5.values.mean() == pytest.approx(3.0, abs=3 * sigma / np.sqrt(50_000))

    def test_seeded_reproducibility(self):
        sched = NoiseSchedule.geometric(K=4)
        z0 = Latent(np.arange(6, dtype=float))
        a = forward_diffuse(z0, 2, sched, np.random.default_rng(9))
        b = forward_diffuse(z0, 2, sched, np.random.default_rng(9))
        assert np.array_equal(a.values, b.values)

    def test_posterior_mean_denoising_unbiased(self):
        # z0 ~ N(mu, s2), z_k = z0 + sigma_k eps; the analytic posterior mean
        # (s2 z_k + sigma_k^2 mu) / (s2 + sigma_k^2) recovers z0 on average
        mu, s2 = 2.0, 1.0
        sched = NoiseSchedule.geometric(K=10, sigma_max=2.0, sigma_min=0.1)
        k = 7
        sigma = sched.sigma(k)
        rng = np.random.default_rng(13)
        n = 100_000
        z0 = Latent(mu + np.sqrt(s2) * rng.standard_normal(n))
        zk = forward_diffuse(z0, k, sched, rng)
        post = (s2 * zk.values + sigma ** 2 * mu) / (s2 + sigma ** 2)
        resid = post - z0.values
        se = resid.std() / np.sqrt(n)
        assert abs(resid.mean()) < 4 * se + 1e-12


class TestScoreMatchingLoss:
    def test_perfect_predictor_zero_loss(self):
        # the model mirrors the loss's rng draws (k first, then eps) and
        # echoes the exact noise back as its prediction
        sched = NoiseSchedule.geometric(K=12)
        z0 = Latent(np.zeros(8))

        class Echo(ScoreModel):
            convention = "epsilon"

            def __init__(self):
                self.rng = np.random.default_rng(123)

            def evaluate(self, z, k, cond=None):
                k_drawn = int(self.rng.integers(1, sched.K + 1))
                assert k_drawn == k
                return Latent(self.rng.standard_normal(z.shape))

        loss = score_matching_loss(Echo(), z0, None, sched,
                                   np.random.default_rng(123), 50)
        assert loss == pytest.approx(0.0, abs=1e-24)

    def test_zero_model_loss_is_dim(self):
        class Zero(ScoreModel):
            convention = "epsilon"

            def evaluate(self, z, k, cond=None):
                return Latent(np.zeros(z.shape))

        sched = NoiseSchedule.geometric(K=5)
        dim = 16
        loss = score_matching_loss(Zero(), Latent(np.zeros(dim)), None, sched,
                                   np.random.default_rng(0), 4000)
        assert loss == pytest.approx(dim, rel=0.05)

    def test_nonnegative(self):
        sched = NoiseSchedule.geometric(K=5)
        loss = score_matching_loss(gauss_model(), Latent(np.zeros(8)), 1, sched,
                                   np.random.default_rng(1), 100)
        assert loss >= 0.0


class TestCodec:
    def test_identity_roundtrip(self):
        vol = analytic_sdf(Plane((0, 0, 1.0), 0.0), (6, 6, 6), 0.5,
                           (-1.5, -1.5, -1.5), 1.5)
        codec = IdentityCodec(vol.dims, vol.voxel_size, vol.origin)
        back = codec.decode(codec.encode(vol))
        assert np.array_equal(back.values, vol.values)
        assert back.voxel_size == vol.voxel_size

    def test_decode_clips(self):
        codec = IdentityCodec((2, 2, 2), 1.0)
        vol = codec.decode(Latent(np.linspace(-3, 3, 8)))
        assert vol.values.min() >= -1.0 and vol.values.max() <= 1.0

    def test_gaussian_model_json_roundtrip(self, tmp_path):
        m = gauss_model(dim=4, mu_c=1.5, mu_u=-0.5, var=2.0)
        path = tmp_path / "model.json"
        m.save(path)
        loaded = GaussianScoreModel.load(path)
        assert loaded.variance == m.variance
        assert np.array_equal(loaded.means[1], m.means[1])
        assert np.array_equal(loaded.mean_uncond, m.mean_uncond)
