import numpy as np
import pytest

from lidarsynth.geometry import Pose, axis_angle, rotation_angle
from lidarsynth.metrics import (BevHistogram, aggregate, bev_histogram, chamfer,
                                estimate_normals, icp_align, jsd, mmd,
                                nearest_neighbors, point_to_plane,
                                sequence_consistency)
from lidarsynth.metrics.registration import IcpDegenerateError
from lidarsynth.sensor import PointCloud
from conftest import random_pose


def grid_cloud(seed=0, n=2000, extent=25.0):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-extent, extent, (n, 3))
    pts[:, 2] = rng.uniform(0.0, 3.0, n)
    return PointCloud(pts)


class TestBevHistogram:
    def test_empty_cloud(self):
        h = bev_histogram(PointCloud(np.zeros((0, 3))))
        assert h.counts.sum() == 0

    def test_single_point_center_cell(self):
        h = bev_histogram(PointCloud(np.array([[0.0, 0.0, 0.0]])),
                          extent=50.0, grid=101)
        assert h.counts.sum() == 1
        assert h.counts[50, 50] == 1

    def test_occupancy_not_density(self):
        one = bev_histogram(PointCloud(np.array([[3.0, 3.0, 0.0]])))
        two = bev_histogram(PointCloud(np.array([[3.0, 3.0, 0.0],
                                                 [3.1, 3.1, 0.5]])))
        assert np.array_equal(one.counts, two.counts)

    def test_z_slab_filter(self):
        h = bev_histogram(PointCloud(np.array([[0.0, 0.0, 50.0]])))
        assert h.counts.sum() == 0


class TestMmd:
    def test_identical_sets_zero(self):
        hs = [bev_histogram(grid_cloud(s)) for s in range(4)]
        assert mmd(hs, list(hs), bandwidth=1.0) <= 1e-12

    def test_singleton_hand_expansion(self):
        # orthogonal one-hot histograms: ||h1 - h2||^2 = 2, so the biased
        # 4-term expansion gives k11 + k22 - 2 k12 = 2 - 2 exp(-1 / bw^2)
        c1 = np.zeros((4, 4)); c1[0, 0] = 1
        c2 = np.zeros((4, 4)); c2[3, 3] = 1
        h1 = BevHistogram(c1, 10.0, 5.0)
        h2 = BevHistogram(c2, 10.0, 5.0)
        for bw in (0.3, 1.0, 3.0):
            expected = 2.0 - 2.0 * np.exp(-1.0 / bw ** 2)
            assert mmd([h1], [h2], bw) == pytest.approx(expected, abs=1e-12)
        assert mmd([h1], [h2], 1e4) == pytest.approx(0.0, abs=1e-6)
        assert mmd([h1], [h2], 1e-3) == pytest.approx(2.0, abs=1e-12)

    def test_symmetry(self):
        a = [bev_histogram(grid_cloud(s)) for s in range(3)]
        b = [bev_histogram(grid_cloud(s + 10)) for s in range(3)]
        assert mmd(a, b, 1.0) == pytest.approx(mmd(b, a, 1.0), abs=1e-15)

    def test_empty_set_rejected(self):
        with pytest.raises(ValueError):
            mmd([], [bev_histogram(grid_cloud())], 1.0)


class TestJsd:
    def test_identical_zero(self):
        h = bev_histogram(grid_cloud(1))
        assert jsd(h, h) == 0.0

    def test_disjoint_is_ln2(self):
        a = np.zeros((4, 4)); a[:2] = 1
        b = np.zeros((4, 4)); b[2:] = 1
        val = jsd(BevHistogram(a, 1.0, 0.5), BevHistogram(b, 1.0, 0.5))
        assert val == pytest.approx(np.log(2.0), abs=1e-12)

    def test_two_cell_hand_value(self):
        # effective 2-cell case (cells empty in both sides are ignored):
        # p = (1, 0), q = (0.5, 0.5) gives
        # JSD = 0.5*ln(4/3) + 0.5*(0.5*ln(2/3) + 0.5*ln 2) = 0.215761...
        p = BevHistogram(np.array([[10.0, 0.0], [0.0, 0.0]]), 1.0, 1.0)
        q = BevHistogram(np.array([[5.0, 5.0], [0.0, 0.0]]), 1.0, 1.0)
        expected = 0.5 * np.log(4.0 / 3.0) + 0.25 * np.log(2.0 / 3.0) + 0.25 * np.log(2.0)
        assert expected == pytest.approx(0.2157615543388171, abs=1e-12)
        assert jsd(p, q) == pytest.approx(expected, abs=1e-12)

    def test_zero_total_rejected(self):
        z = BevHistogram(np.zeros((2, 2)), 1.0, 1.0)
        h = BevHistogram(np.ones((2, 2)), 1.0, 1.0)
        with pytest.raises(ValueError):
            jsd(z, h)

    def test_range_and_symmetry(self):
        a = aggregate([bev_histogram(grid_cloud(s)) for s in range(3)])
        b = aggregate([bev_histogram(grid_cloud(s + 7)) for s in range(3)])
        v = jsd(a, b)
        assert 0.0 <= v <= np.log(2.0)
        assert v == pytest.approx(jsd(b, a), abs=1e-15)


class TestNearestNeighbors:
    def test_tree_matches_brute_force(self):
        rng = np.random.default_rng(8)
        pts = rng.normal(size=(5000, 3))
        queries = rng.normal(size=(700, 3))
        d_tree, i_tree = nearest_neighbors(pts, queries)
        d_brute, i_brute = nearest_neighbors(pts, queries, force_brute=True)
        assert np.array_equal(i_tree, i_brute)
        assert np.allclose(d_tree, d_brute, atol=1e-12)


class TestNormalsAndPointToPlane:
    def test_plane_normals(self):
        rng = np.random.default_rng(2)
        pts = np.zeros((500, 3))
        pts[:, :2] = rng.uniform(-10, 10, (500, 2))
        pts[:, 2] = -2.0                       # plane below the origin
        n = estimate_normals(PointCloud(pts), 8)
        assert np.abs(np.linalg.norm(n, axis=1) - 1.0).max() < 1e-9
        angles = np.degrees(np.arccos(np.clip(np.abs(n[:, 2]), -1, 1)))
        assert angles.max() < 1.0
        assert np.all(n[:, 2] > 0)             # oriented toward the origin

    def test_sphere_normals_radial(self):
        # evenly sampled large sphere (Fibonacci lattice)
        n_pts = 4000
        i = np.arange(n_pts)
        z = 1.0 - 2.0 * (i + 0.5) / n_pts
        phi = np.pi * (1.0 + np.sqrt(5.0)) * i
        r_xy = np.sqrt(1.0 - z ** 2)
        dirs = np.stack([r_xy * np.cos(phi), r_xy * np.sin(phi), z], axis=1)
        pts = 20.0 * dirs
        n = estimate_normals(PointCloud(pts), 12)
        cos = np.abs(np.einsum("ij,ij->i", n, dirs))
        assert np.degrees(np.arccos(np.clip(cos, -1, 1))).max() < 5.0

    def test_point_to_plane_self_zero(self, street_scan_cloud):
        res = point_to_plane(street_scan_cloud, street_scan_cloud)
        assert res.max() == 0.0

    def test_point_above_plane(self):
        rng = np.random.default_rng(4)
        pts = np.zeros((400, 3))
        pts[:, :2] = rng.uniform(-5, 5, (400, 2))
        tgt = PointCloud(pts)
        src = PointCloud(np.array([[0.3, -0.2, 0.3]]))
        res = point_to_plane(src, tgt)
        assert res[0] == pytest.approx(0.3, abs=1e-6)

    def test_rigid_invariance(self, street_scan_cloud):
        rng = np.random.default_rng(5)
        sub = street_scan_cloud.subset(np.arange(0, len(street_scan_cloud), 7))
        normals = estimate_normals(sub)
        base = point_to_plane(sub, sub, normals)
        for _ in range(3):
            p = random_pose(rng)
            moved = PointCloud(p.apply(sub.points))
            res = point_to_plane(moved, moved, normals @ p.rotation.T)
            assert np.abs(res - base).max() < 1e-9


class TestIcp:
    def test_identity_for_identical_clouds(self, street_scan_cloud):
        pose, energy = icp_align(street_scan_cloud, street_scan_cloud,
                                 Pose.identity())
        assert energy < 1e-9
        assert np.abs(pose.translation).max() < 1e-9
        assert rotation_angle(pose.rotation) < 1e-9

    def test_translation_recovery(self, street_scan_cloud):
        shift = np.array([0.1, 0.0, 0.0])
        src = PointCloud(street_scan_cloud.points + shift)
        pose, energy = icp_align(src, street_scan_cloud, Pose.identity())
        assert np.abs(pose.translation + shift).max() < 1e-3
        assert energy < 1e-6

    def test_randomized_recovery(self, street_scan_cloud):
        rng = np.random.default_rng(6)
        ok = 0
        sub = street_scan_cloud.subset(np.arange(0, len(street_scan_cloud), 3))
        for _ in range(20):
            axis = rng.normal(size=3)
            angle = rng.uniform(-np.deg2rad(5), np.deg2rad(5))
            t = rng.uniform(-0.5, 0.5, 3) * np.array([1, 1, 0.2])
            truth = Pose(axis_angle(axis, angle), t)
            src = PointCloud(truth.apply(sub.points))
            pose, _ = icp_align(src, sub, Pose.identity())
            err = pose @ truth
            if (np.linalg.norm(err.translation) < 1e-2
                    and rotation_angle(err.rotation) < np.deg2rad(0.5)):
                ok += 1
        assert ok >= 19

    def test_degenerate_geometry_raises(self):
        rng = np.random.default_rng(7)
        pts = np.zeros((300, 3))
        pts[:, 0] = rng.uniform(-1, 1, 300)     # collinear cloud
        with pytest.raises(IcpDegenerateError):
            icp_align(PointCloud(pts + np.array([0.05, 0, 0])), PointCloud(pts),
                      Pose.identity())


class TestSequenceConsistency:
    def test_repeated_scan_zeroes(self, street_scan_cloud):
        report = sequence_consistency([street_scan_cloud] * 5)
        assert report.total_energy == pytest.approx(0.0, abs=1e-12)
        assert report.average_energy == pytest.approx(0.0, abs=1e-12)
        assert report.outlier_percentage == 0.0
        assert len(report.poses) == 4

    def test_global_rigid_invariance(self, street_scan_cloud):
        rng = np.random.default_rng(8)
        sub = street_scan_cloud.subset(np.arange(0, len(street_scan_cloud), 5))
        scans = [PointCloud(sub.points + np.array([0.05 * i, 0.0, 0.0]))
                 for i in range(3)]
        base = sequence_consistency(scans)
        g = random_pose(rng)
        moved = [PointCloud(g.apply(s.points)) for s in scans]
        report = sequence_consistency(moved)
        assert report.average_energy == pytest.approx(base.average_energy, abs=1e-6)


class TestChamfer:
    def test_identity_zero(self, street_scan_cloud):
        assert chamfer(street_scan_cloud, street_scan_cloud) == 0.0

    def test_two_singletons(self):
        a = PointCloud(np.array([[0.0, 0.0, 0.0]]))
        b = PointCloud(np.array([[1.0, 0.0, 0.0]]))
        assert chamfer(a, b) == 1.0

    def test_symmetry(self):
        a = grid_cloud(10, n=400)
        b = grid_cloud(11, n=300)
        assert chamfer(a, b) == pytest.approx(chamfer(b, a), abs=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            chamfer(PointCloud(np.zeros((0, 3))), grid_cloud())
