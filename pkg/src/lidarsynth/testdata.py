"""Procedural test fixtures: analytic scenes, banks, maps, and configs.

Everything here is deterministic and cheap to build; the `gen-testdata` CLI
subcommand writes the file forms, and the test suite uses the builders
directly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .diffusion.models import GaussianScoreModel, IdentityCodec
from .geometry.mesh import TriMesh, box_mesh, concat_meshes, plane_mesh
from .geometry.volume import Box, Plane, TsdfVolume, analytic_sdf, union_sdf
from .io.container import write_layout, write_tsdf
from .sensor.config import LidarConfig
from .world.layout import SemanticLayout, VectorMap
from .world.trajectory import TrajectoryBank, TrajectoryTemplate


def plane_tsdf(half_size: float = 12.0, voxel_size: float = 0.2,
               depth_below: float = 1.0, height_above: float = 2.0) -> TsdfVolume:
    """Flat ground at z = 0 sampled into a TSDF block."""
    n_xy = int(2 * half_size / voxel_size) + 1
    n_z = int((depth_below + height_above) / voxel_size) + 1
    origin = (-half_size, -half_size, -depth_below)
    return analytic_sdf(Plane((0.0, 0.0, 1.0), 0.0), (n_xy, n_xy, n_z),
                        voxel_size, origin, 3.0 * voxel_size)


def street_tsdf(half_size: float = 15.0, voxel_size: float = 0.25) -> TsdfVolume:
    """Ground plus a few building blocks flanking an open corridor."""
    shapes = [Plane((0.0, 0.0, 1.0), 0.0)]
    for x, y, hx, hy, hz in [(-8, 9, 4, 3, 3), (4, 10, 5, 2.5, 4),
                             (-4, -10, 5, 3, 3.5), (8, -9, 3, 3, 2.5)]:
        shapes.append(Box((x, y, hz), (hx, hy, hz)))
    n_xy = int(2 * half_size / voxel_size) + 1
    n_z = int(9.0 / voxel_size) + 1
    origin = (-half_size, -half_size, -1.0)
    return union_sdf(shapes, (n_xy, n_xy, n_z), voxel_size, origin, 3.0 * voxel_size)


def street_mesh(half_size: float = 30.0) -> TriMesh:
    """Exact-geometry street: ground plane, flanking walls, parked blocks."""
    parts = [plane_mesh(half_size, 0.0, cells=6)]
    parts.append(box_mesh((half_size * 0.8, 0.3, 1.5), (0.0, 8.0, 1.5)))
    parts.append(box_mesh((half_size * 0.8, 0.3, 1.5), (0.0, -8.0, 1.5)))
    for x, y in [(-12.0, 5.0), (-2.0, -5.0), (9.0, 4.5), (16.0, -4.0)]:
        parts.append(box_mesh((2.2, 1.0, 0.8), (x, y, 0.8)))
    for x, y in [(-18.0, 6.5), (5.0, -6.5), (20.0, 6.5)]:
        parts.append(box_mesh((0.15, 0.15, 2.0), (x, y, 2.0)))
    return concat_meshes(parts)


def straight_bank(lengths=(8.0, 12.0, 16.0), duration: float = 2.0,
                  include_curve: bool = True,
                  include_walk: bool = True) -> TrajectoryBank:
    """Constant-velocity straight templates (canonical +x), a mild arc, and a
    pedestrian-class walking track."""
    templates = []
    ts = np.linspace(0.0, duration, 21)
    for d in lengths:
        xs = d * ts / duration
        states = np.stack([ts, xs, np.zeros_like(ts), np.zeros_like(ts)], axis=1)
        templates.append(TrajectoryTemplate(states, "vehicle", f"straight_{d:g}m"))
    if include_curve:
        radius, arc = 20.0, 0.5
        ang = arc * ts / duration
        states = np.stack([ts, radius * np.sin(ang), radius * (1 - np.cos(ang)), ang],
                          axis=1)
        templates.append(TrajectoryTemplate(states, "vehicle", "arc_20m"))
    if include_walk:
        xs = 1.4 * ts                      # typical walking pace
        states = np.stack([ts, xs, np.zeros_like(ts), np.zeros_like(ts)], axis=1)
        templates.append(TrajectoryTemplate(states, "pedestrian", "walk"))
    return TrajectoryBank(templates)


def demo_vector_map(length: float = 40.0, lane_offset: float = 2.0) -> VectorMap:
    polys = [
        (np.array([[-length, -lane_offset], [length, -lane_offset]]), 0),
        (np.array([[-length, lane_offset], [length, lane_offset]]), 0),
        (np.array([[-length, 0.0], [length, 0.0]]), 1),
        (np.array([[-length, -6.0], [length, -6.0]]), 2),
        (np.array([[-length, 6.0], [length, 6.0]]), 2),
        (np.array([[0.0, -6.0], [0.0, 6.0]]), 3),
    ]
    return VectorMap(polys)


def strip_layout(x_range=(-6.0, -2.0), y_range=(-1.0, 1.0),
                 resolution: float = 0.5, half_size: float = 12.0) -> SemanticLayout:
    """Layout whose drivable cells cover one rectangular strip."""
    n = int(2 * half_size / resolution) + 1
    origin = np.array([-half_size, -half_size])
    channels = np.zeros((5, n, n), dtype=bool)
    xs = origin[0] + resolution * np.arange(n)
    ys = origin[1] + resolution * np.arange(n)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    strip = ((gx >= x_range[0]) & (gx <= x_range[1])
             & (gy >= y_range[0]) & (gy <= y_range[1]))
    channels[0] = strip
    return SemanticLayout(channels, resolution, origin)


def demo_gaussian_model(vol: TsdfVolume) -> GaussianScoreModel:
    """Score oracle whose conditional mean reproduces the given volume."""
    codec = IdentityCodec(vol.dims, vol.voxel_size, vol.origin)
    mean = codec.encode(vol).flat()
    return GaussianScoreModel({1: mean}, np.zeros_like(mean), 1.0)


def default_lidar(n_beams: int = 16, azimuth_count: int = 256) -> LidarConfig:
    return LidarConfig.uniform(n_beams, np.deg2rad(-2.0), np.deg2rad(-24.0),
                               azimuth_count, max_range=80.0, min_range=0.5)


def write_testdata(out_dir) -> list:
    """Write the demo dataset; returns the list of created file names."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    created = []

    def record(name):
        created.append(name)
        return out / name

    write_tsdf(record("plane.tsdf"), plane_tsdf())
    write_tsdf(record("street.tsdf"), street_tsdf())
    straight_bank().save(record("bank.json"))
    demo_vector_map().save(record("map.json"))
    write_layout(record("layout.layo"), strip_layout(
        x_range=(-8.0, 8.0), y_range=(-2.0, 2.0), half_size=14.0))

    lidar = default_lidar()
    lidar.sensor_offset = type(lidar.sensor_offset)(
        np.eye(3), np.array([0.0, 0.0, 1.8]))
    lidar.save(record("lidar.json"))

    vol = plane_tsdf(half_size=8.0, voxel_size=0.5)
    demo_gaussian_model(vol).save(record("gaussian_model.json"))
    sample_spec = {
        "model": "gaussian_model.json",
        "sampler": "euler", "w": 0.5, "cond": 1,
        "dims": list(vol.dims), "voxel_size": vol.voxel_size,
        "origin": vol.origin.tolist(),
    }
    with open(record("sample.json"), "w") as f:
        json.dump(sample_spec, f, indent=2)

    pipeline = {
        "frames": 5, "dt": 0.1, "seed": 7,
        "scene": {"tsdf": "street.tsdf"},
        "lidar": "lidar.json",
        "bank": "bank.json",
        "layout": "layout.layo",
        "actors": [{"id": 1, "class": "vehicle", "footprint": [4.5, 2.0, 1.6]}],
        "raydrop": {"mode": "gumbel", "temperature": 1.0},
        "trajectory": {"max_attempts": 2000},
    }
    with open(record("pipeline.json"), "w") as f:
        json.dump(pipeline, f, indent=2)

    scan = {
        "frames": 1, "dt": 0.1, "seed": 0,
        "scene": {"tsdf": "plane.tsdf"},
        "lidar": "lidar.json",
        "raydrop": {"mode": "none"},
    }
    with open(record("scan.json"), "w") as f:
        json.dump(scan, f, indent=2)

    return created
