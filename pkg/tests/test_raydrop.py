import numpy as np
import pytest

from lidarsynth.geometry import Pose, plane_mesh
from lidarsynth.sensor import (AnalyticRaydrop, LidarConfig, apply_raydrop,
                               gumbel_sigmoid_sample, simulate_scan)
from lidarsynth.world import TimeStep, WorldScene, compose


def synthetic_scan():
    scene = WorldScene.from_mesh(plane_mesh(120.0, 0.0, cells=2), [])
    composed = compose(scene, TimeStep(Pose.identity()))
    cfg = LidarConfig.uniform(24, np.deg2rad(-1.0), np.deg2rad(-30.0), 128,
                              max_range=150.0)
    return simulate_scan(composed, cfg, Pose(np.eye(3), (0, 0, 1.8)))


class TestGumbelSigmoid:
    @pytest.mark.parametrize("mode", ["gumbel", "bernoulli", "none"])
    def test_probability_one_keeps_all(self, mode):
        rng = np.random.default_rng(0)
        keep = gumbel_sigmoid_sample(np.ones((100, 100)), 1.0, rng, mode)
        assert keep.all()

    @pytest.mark.parametrize("mode", ["gumbel", "bernoulli"])
    def test_probability_zero_drops_all(self, mode):
        rng = np.random.default_rng(0)
        keep = gumbel_sigmoid_sample(np.zeros((100, 100)), 1.0, rng, mode)
        assert not keep.any()

    def test_keep_fraction_half(self):
        rng = np.random.default_rng(1)
        keep = gumbel_sigmoid_sample(np.full((1000, 1000), 0.5), 1.0, rng, "gumbel")
        assert abs(keep.mean() - 0.5) < 0.002

    def test_temperature_invariant_decision(self):
        p = np.full((500, 500), 0.5)
        cold = gumbel_sigmoid_sample(p, 1e-3, np.random.default_rng(2), "gumbel")
        warm = gumbel_sigmoid_sample(p, 1.0, np.random.default_rng(2), "gumbel")
        assert np.array_equal(cold, warm)

    def test_bad_arguments(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            gumbel_sigmoid_sample(np.full((2, 2), 0.5), 0.0, rng, "gumbel")
        with pytest.raises(ValueError):
            gumbel_sigmoid_sample(np.full((2, 2), 1.5), 1.0, rng, "gumbel")
        with pytest.raises(ValueError):
            gumbel_sigmoid_sample(np.full((2, 2), 0.5), 1.0, rng, "softmax")

    def test_deterministic_given_seed(self):
        p = np.random.default_rng(3).random((64, 64))
        a = gumbel_sigmoid_sample(p, 0.7, np.random.default_rng(4), "gumbel")
        b = gumbel_sigmoid_sample(p, 0.7, np.random.default_rng(4), "gumbel")
        assert np.array_equal(a, b)


class TestAnalyticRaydrop:
    def test_probability_range_and_masking(self):
        img, _ = synthetic_scan()
        p = AnalyticRaydrop().probabilities(img)
        assert p.shape == img.shape
        assert np.all((p >= 0.0) & (p <= 1.0))
        assert np.all(p[~img.mask] == 0.0)

    def test_distance_preference(self):
        img, _ = synthetic_scan()
        model = AnalyticRaydrop(a=2.0, b=0.5, c=0.0)
        p = model.probabilities(img)
        near = img.depth[img.mask] < 10.0
        far = img.depth[img.mask] > 40.0
        assert p[img.mask][near].min() > p[img.mask][far].max()


class TestApplyRaydrop:
    def test_mode_none_unchanged(self):
        img, cloud = synthetic_scan()
        img2, cloud2 = apply_raydrop(img, cloud, AnalyticRaydrop(), "none")
        assert img2 is img and cloud2 is cloud

    def test_outputs_are_subsets(self):
        img, cloud = synthetic_scan()
        rng = np.random.default_rng(5)
        img2, cloud2 = apply_raydrop(img, cloud, AnalyticRaydrop(), "gumbel",
                                     1.0, rng)
        assert img2.mask.sum() <= img.mask.sum()
        assert np.all(img.mask[img2.mask])
        assert len(cloud2) == img2.mask.sum()
        # every surviving point existed before, at the same coordinates
        key = lambda pc: {(b, a): tuple(p) for b, a, p in
                          zip(pc.beam, pc.azimuth, pc.points)}
        before, after = key(cloud), key(cloud2)
        assert all(before[k] == v for k, v in after.items())

    def test_strong_distance_bias_shortens_mean_range(self):
        img, cloud = synthetic_scan()
        rng = np.random.default_rng(6)
        model = AnalyticRaydrop(a=3.0, b=0.25, c=0.0)
        img2, cloud2 = apply_raydrop(img, cloud, model, "gumbel", 1.0, rng)
        assert 0 < len(cloud2) < len(cloud)
        assert img2.depth[img2.mask].mean() < img.depth[img.mask].mean()

    def test_range_image_invariants_preserved(self):
        img, cloud = synthetic_scan()
        rng = np.random.default_rng(7)
        img2, _ = apply_raydrop(img, cloud, AnalyticRaydrop(), "bernoulli", 1.0, rng)
        assert np.all(img2.depth[~img2.mask] == 0.0)
        assert np.all(img2.depth[img2.mask] > 0.0)
