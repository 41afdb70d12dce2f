"""Ray generation and scan simulation against composed scene geometry."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..geometry.bvh import hit_normals, raycast_batch
from ..geometry.pose import Pose
from .cloud import PointCloud, ranges
from .config import LidarConfig
from .range_image import RangeImage, beam_directions


@dataclass
class RayBundle:
    origins: np.ndarray     # (B*A, 3) world frame
    dirs: np.ndarray        # (B*A, 3) unit, world frame
    dirs_sensor: np.ndarray  # (B*A, 3) unit, sensor frame
    beam: np.ndarray        # (B*A,)
    azimuth: np.ndarray     # (B*A,)


def generate_rays(cfg: LidarConfig, ego: Pose) -> RayBundle:
    """One ray per (beam, azimuth) pixel, rotated into the world frame by
    ego compose sensor_offset; all origins sit at the sensor position."""
    dirs_sensor = beam_directions(cfg).reshape(-1, 3)
    sensor_pose = ego @ cfg.sensor_offset
    dirs_world = sensor_pose.rotate(dirs_sensor)
    origins = np.broadcast_to(sensor_pose.translation, dirs_world.shape).copy()
    b, a = np.divmod(np.arange(dirs_sensor.shape[0]), cfg.azimuth_count)
    return RayBundle(origins, dirs_world, dirs_sensor,
                     b.astype(np.int32), a.astype(np.int32))


def simulate_scan(composed, cfg: LidarConfig, ego: Pose) -> Tuple[RangeImage, PointCloud]:
    """Cast the full beam pattern against a composed scene.

    `composed` is anything exposing `.bvh` (for the cast) and `.mesh` (for hit
    normals and per-triangle actor labels), e.g. world.ComposedScene. The
    returned cloud is in the ego frame; its depth image stores Euclidean range
    from the sensor origin.
    """
    rays = generate_rays(cfg, ego)
    t, tri = raycast_batch(composed.bvh, rays.origins, rays.dirs, cfg.max_range)

    hit = tri >= 0
    pts_sensor = rays.dirs_sensor[hit] * t[hit, None]
    depth = ranges(pts_sensor)
    in_gate = (depth >= cfg.min_range) & (depth <= cfg.max_range)

    hit_idx = np.nonzero(hit)[0][in_gate]
    pts_sensor = pts_sensor[in_gate]
    depth = depth[in_gate]
    tri_ids = tri[hit_idx]

    b = rays.beam[hit_idx]
    a = rays.azimuth[hit_idx]
    shape = (cfg.n_beams, cfg.azimuth_count)
    depth_img = np.zeros(shape)
    mask = np.zeros(shape, dtype=bool)
    incidence = np.zeros(shape)
    depth_img[b, a] = depth
    mask[b, a] = True

    normals = hit_normals(composed.mesh, tri_ids, rays.dirs[hit_idx])
    incidence[b, a] = np.abs(np.einsum("ij,ij->i", normals, rays.dirs[hit_idx]))

    labels = None
    if composed.mesh.labels is not None:
        labels = composed.mesh.labels[tri_ids]

    pts_ego = cfg.sensor_offset.apply(pts_sensor)
    cloud = PointCloud(pts_ego, frame="ego", beam=b, azimuth=a, label=labels)
    img = RangeImage(depth_img, mask, cfg, incidence=incidence)
    return img, cloud
