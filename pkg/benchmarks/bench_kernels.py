#!/usr/bin/env python3
"""Benchmark the compiled raycast core against the pure numpy fallback.

Builds a synthetic street scene, casts full sensor sweeps through both kernel
backends, checks that they agree bit for bit, and prints a throughput table.

Usage: python benchmarks/bench_kernels.py [--rays N] [--repeat K]
"""

import argparse
import time

import numpy as np

from lidarsynth._kernels import fallback
from lidarsynth.geometry import Pose, build_bvh, extract_mesh
from lidarsynth.sensor import LidarConfig, generate_rays
from lidarsynth.testdata import street_tsdf

try:
    from lidarsynth._kernels import _core
except ImportError:
    _core = None


def kernel_args(bvh, origins, dirs, max_range):
    return (bvh.node_min, bvh.node_max, bvh.node_left, bvh.node_right,
            bvh.node_start, bvh.node_count, bvh.prim,
            bvh.v0, bvh.e1, bvh.e2, origins, dirs, max_range, 1e-6)


def bench(fn, args, repeat):
    best = np.inf
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--beams", type=int, default=64)
    parser.add_argument("--azimuths", type=int, default=1024)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    mesh = extract_mesh(street_tsdf(half_size=20.0, voxel_size=0.15))
    bvh = build_bvh(mesh)
    cfg = LidarConfig.uniform(args.beams, np.deg2rad(2.0), np.deg2rad(-24.0),
                              args.azimuths, max_range=120.0)
    rays = generate_rays(cfg, Pose(np.eye(3), (0.0, 0.0, 1.8)))
    n = len(rays.dirs)
    kargs = kernel_args(bvh, rays.origins, rays.dirs, cfg.max_range)

    print(f"scene: {mesh.n_triangles} triangles, {n} rays, "
          f"best of {args.repeat}")
    t_py, res_py = bench(fallback.raycast_kernel, kargs, args.repeat)
    print(f"  python fallback : {t_py:8.3f} s   {n / t_py / 1e6:6.2f} Mray/s")

    if _core is None:
        print("  compiled core   : not built (pip install -e . rebuilds it)")
        return

    t_c, res_c = bench(_core.raycast_kernel, kargs, args.repeat)
    print(f"  compiled core   : {t_c:8.3f} s   {n / t_c / 1e6:6.2f} Mray/s")
    print(f"  speedup         : {t_py / t_c:8.1f}x")

    same = (np.array_equal(res_py[0], res_c[0])
            and np.array_equal(res_py[1], res_c[1]))
    print(f"  results identical: {same}")
    if not same:
        raise SystemExit("backend mismatch")


if __name__ == "__main__":
    main()
