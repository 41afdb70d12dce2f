"""Acceptance suite: one test per release criterion, each printing a
PASS line with its measured numbers (run with -s or -rP to see them)."""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from lidarsynth.cli import main as cli_main
from lidarsynth.diffusion import GaussianScoreModel, NoiseSchedule, sample_euler, sample_langevin
from lidarsynth.geometry import (Pose, Sphere, TriMesh, analytic_sdf, axis_angle,
                                 build_bvh, extract_mesh, plane_mesh, raycast_batch,
                                 raycast_brute_force, rotation_angle)
from lidarsynth.metrics import (bev_histogram, chamfer, icp_align, jsd, mmd,
                                point_to_plane, sequence_consistency)
from lidarsynth.sensor import (AnalyticRaydrop, LidarConfig, PointCloud,
                               apply_raydrop, gumbel_sigmoid_sample, simulate_scan)
from lidarsynth.testdata import straight_bank, street_mesh, strip_layout, write_testdata
from lidarsynth.world import (TimeStep, TrajectoryExhausted, WorldScene, compose,
                              sample_trajectories, verify_trajectory)


def report(name: str, elapsed: float, detail: str = ""):
    extra = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {name}: PASS in {elapsed:.2f}s{extra}")


def test_raycast_oracle():
    rng = np.random.default_rng(100)
    centers = rng.uniform(-10, 10, (1000, 3))
    verts = (centers[:, None, :] + rng.normal(0.0, 0.6, (1000, 3, 3))).reshape(-1, 3)
    mesh = TriMesh(verts, np.arange(3000, dtype=np.int32).reshape(-1, 3))
    origins = rng.uniform(-12, 12, (10_000, 3))
    dirs = rng.normal(size=(10_000, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    start = time.perf_counter()
    bvh = build_bvh(mesh)
    t, ids = raycast_batch(bvh, origins, dirs, 60.0)
    t_ref, ids_ref = raycast_brute_force(mesh, origins, dirs, 60.0)
    elapsed = time.perf_counter() - start

    assert np.array_equal(np.isfinite(t), np.isfinite(t_ref))
    hit = np.isfinite(t)
    assert np.abs(t[hit] - t_ref[hit]).max() <= 1e-9
    differs = (ids != ids_ref) & hit      # id swaps allowed only on ties
    if differs.any():
        assert np.abs(t[differs] - t_ref[differs]).max() <= 1e-9
    assert elapsed < 5.0
    report("raycast-oracle", elapsed, f"{int(hit.sum())} hits, ids equal: "
           f"{bool(np.array_equal(ids, ids_ref))}")


def test_analytic_plane_scan():
    elev = np.deg2rad(np.linspace(-2.0, -24.0, 12))
    cfg = LidarConfig(elev, 256, max_range=120.0, min_range=0.5)
    h = 1.8
    ego = Pose(np.eye(3), (0.0, 0.0, h))
    expected = h / np.sin(-elev)

    start = time.perf_counter()
    exact = WorldScene.from_mesh(plane_mesh(80.0, 0.0, cells=2), [])
    img, _ = simulate_scan(compose(exact, TimeStep(Pose.identity())), cfg, ego)
    assert img.mask.all()
    err_exact = np.abs(img.depth - expected[:, None]).max()
    assert err_exact <= 1e-9

    voxel = 0.2
    vol = analytic_sdf(
        __import__("lidarsynth.geometry", fromlist=["Plane"]).Plane((0, 0, 1.0), 0.0),
        (161, 161, 11), voxel, (-16.0, -16.0, -1.0), 3 * voxel)
    mc_scene = WorldScene.from_mesh(extract_mesh(vol), [])
    cfg_short = LidarConfig(elev[5:], 256, max_range=120.0, min_range=0.5)
    img_mc, _ = simulate_scan(compose(mc_scene, TimeStep(Pose.identity())),
                              cfg_short, ego)
    elapsed = time.perf_counter() - start

    expected_mc = h / np.sin(-cfg_short.elevations)
    assert img_mc.mask.all()
    err_mc = np.abs(img_mc.depth - expected_mc[:, None]).max()
    assert err_mc <= 2 * voxel
    assert elapsed < 1.0
    report("analytic-plane-scan", elapsed,
           f"exact err {err_exact:.2e}, marching-cubes err {err_mc:.3f} m")


def test_marching_cubes_sphere():
    start = time.perf_counter()
    voxel = 0.2
    r = 5 * voxel
    vol = analytic_sdf(Sphere(np.zeros(3), r), (16, 16, 16), voxel,
                       (-1.5, -1.5, -1.5), 3 * voxel)
    mesh = extract_mesh(vol)
    elapsed = time.perf_counter() - start
    radii = np.linalg.norm(mesh.vertices, axis=1)
    assert mesh.n_triangles > 0
    assert np.all(np.abs(radii - r) <= voxel)
    assert elapsed < 1.0
    report("marching-cubes-sphere", elapsed,
           f"{mesh.n_triangles} tris, radius err max {np.abs(radii - r).max():.3f}")


def test_cfg_gaussian_sampling():
    dim = 8
    model = GaussianScoreModel({1: np.full(dim, 2.0)}, np.zeros(dim), 1.0)
    sched = NoiseSchedule.geometric()

    start = time.perf_counter()
    z = sample_langevin(model, sched, 1, 0.5, 5,
                        np.random.default_rng(2024), shape=(2000, dim))
    mean = z.values.mean(axis=0)
    var = z.values.var(axis=0)
    assert np.abs(mean - 3.0).max() <= 0.15
    assert np.abs(var - 1.0).max() <= 0.2

    ze = sample_euler(model, sched, 1, 0.0,
                      np.random.default_rng(2025), shape=(2000, dim))
    mean_e = ze.values.mean(axis=0)
    assert np.abs(mean_e - 2.0).max() <= 0.15
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    report("cfg-gaussian-sampling", elapsed,
           f"langevin mean {mean.mean():.3f}, var {var.mean():.3f}, "
           f"euler mean {mean_e.mean():.3f}")


def test_gumbel_sigmoid_calibration():
    n = 1_000_000
    start = time.perf_counter()
    for i, p in enumerate((0.1, 0.5, 0.9)):
        rng = np.random.default_rng(300 + i)
        keep = gumbel_sigmoid_sample(np.full(n, p), 1.0, rng, "gumbel")
        bound = 3.0 * np.sqrt(p * (1 - p) / n)
        assert abs(keep.mean() - p) <= bound
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    report("gumbel-calibration", elapsed)


def test_metric_identities():
    rng = np.random.default_rng(4)
    cloud = PointCloud(rng.uniform(-30, 30, (1500, 3)) * np.array([1, 1, 0.1]))
    start = time.perf_counter()
    h = bev_histogram(cloud)
    assert mmd([h, h], [h, h], bandwidth=1.0) <= 1e-12
    assert jsd(h, h) == 0.0
    from lidarsynth.metrics import BevHistogram
    other = BevHistogram((h.counts == 0).astype(float), h.extent, h.resolution)
    assert abs(jsd(h, other) - np.log(2.0)) <= 1e-9
    assert chamfer(cloud, cloud) == 0.0
    assert point_to_plane(cloud, cloud).max() == 0.0
    elapsed = time.perf_counter() - start
    assert elapsed < 4.0       # four identity families, each well under 1 s
    report("metric-identities", elapsed)


def test_icp_recovery():
    scene = WorldScene.from_mesh(street_mesh(), [])
    cfg = LidarConfig.uniform(24, np.deg2rad(-2.0), np.deg2rad(-24.0), 360,
                              max_range=80.0)
    _, cloud = simulate_scan(compose(scene, TimeStep(Pose.identity())), cfg,
                             Pose(np.eye(3), (0.0, 0.0, 1.8)))
    sub = cloud.subset(np.arange(0, len(cloud), 3))
    rng = np.random.default_rng(500)

    start = time.perf_counter()
    ok = 0
    for _ in range(100):
        angle = rng.uniform(-np.deg2rad(5.0), np.deg2rad(5.0))
        axis = rng.normal(size=3)
        t = rng.uniform(-0.5, 0.5, 3) * np.array([1.0, 1.0, 0.2])
        truth = Pose(axis_angle(axis, angle), t)
        src = PointCloud(truth.apply(sub.points))
        try:
            pose, _ = icp_align(src, sub, Pose.identity())
        except Exception:
            continue
        err = pose @ truth
        if (np.linalg.norm(err.translation) < 1e-2
                and rotation_angle(err.rotation) < np.deg2rad(0.5)):
            ok += 1
    elapsed = time.perf_counter() - start
    assert ok >= 95
    assert elapsed < 30.0
    report("icp-recovery", elapsed, f"{ok}/100 recovered")


def test_temporal_self_consistency():
    scene = WorldScene.from_mesh(street_mesh(), [])
    composed = compose(scene, TimeStep(Pose.identity()))
    cfg = LidarConfig.uniform(32, np.deg2rad(-1.0), np.deg2rad(-24.0), 512,
                              max_range=100.0)

    start = time.perf_counter()
    clean_scans, dropped_scans = [], []
    model = AnalyticRaydrop()
    for i in range(10):
        ego = Pose(np.eye(3), (1.0 * i, 0.0, 1.8))
        img, cloud = simulate_scan(composed, cfg, ego)
        clean_scans.append(cloud)
        rng = np.random.default_rng([42, i])
        _, masked = apply_raydrop(img, cloud, model, "gumbel", 1.0, rng)
        dropped_scans.append(masked)

    clean = sequence_consistency(clean_scans, tau=0.5)
    assert clean.average_energy < 0.05
    assert clean.outlier_percentage < 2.0

    dropped = sequence_consistency(dropped_scans, tau=0.5)
    assert dropped.outlier_percentage <= clean.outlier_percentage + 1.0
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    report("temporal-self-consistency", elapsed,
           f"clean avg {clean.average_energy:.4f} m / outliers "
           f"{clean.outlier_percentage:.2f}%, with raydrop "
           f"{dropped.outlier_percentage:.2f}%")


def test_rejective_sampling():
    from lidarsynth.geometry import box_mesh, concat_meshes
    layout = strip_layout((-6.0, -2.0), (-1.0, 1.0), half_size=50.0)
    bank = straight_bank(include_curve=False)

    start = time.perf_counter()
    open_scene = WorldScene.from_mesh(plane_mesh(60.0, 0.0, cells=4), [])
    result = sample_trajectories(bank, open_scene, layout, 0, 1234,
                                 max_attempts=1000, dt=0.2)
    assert result.acceptance_ratio == 1.0

    walled = WorldScene.from_mesh(concat_meshes([
        plane_mesh(60.0, 0.0, cells=4),
        box_mesh((0.1, 60.0, 1.0), (1.0, 0.0, 1.0)),
    ]), [])
    with pytest.raises(TrajectoryExhausted) as err:
        sample_trajectories(bank, walled, layout, 0, 1234,
                            max_attempts=1000, dt=0.2)
    assert err.value.accepted == 0
    assert err.value.attempts == 1000

    from lidarsynth.world import make_vehicle
    busy = WorldScene.from_mesh(plane_mesh(60.0, 0.0, cells=4),
                                [make_vehicle(1), make_vehicle(2)])
    wide = strip_layout((-10.0, 10.0), (-6.0, 6.0), half_size=50.0)
    accepted = sample_trajectories(bank, busy, wide, 2, 99,
                                   max_attempts=2000, dt=0.2)
    reports = verify_trajectory(busy, accepted.trajectory)
    assert all(r.clean() for r in reports)
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    report("rejective-sampling", elapsed,
           f"open ratio 1.0, walls 0/1000, verified {len(reports)} checks")


def test_end_to_end_determinism(tmp_path):
    data = tmp_path / "data"
    write_testdata(data)
    start = time.perf_counter()

    def run(out, threads):
        code = cli_main(["--out-dir", str(out), "--seed", "7",
                         "--threads", str(threads),
                         "--config", str(data / "pipeline.json"), "simulate"])
        assert code == 0
        return {p.name: p.read_bytes() for p in sorted(Path(out).iterdir())}

    a = run(tmp_path / "a", 1)
    b = run(tmp_path / "b", 1)
    c = run(tmp_path / "c", 4)
    assert a == b
    assert a == c
    elapsed = time.perf_counter() - start
    report("end-to-end-determinism", elapsed,
           f"{len(a)} artifacts byte-identical across reruns and thread counts")
