"""Spherical range images: projection to and from point clouds.

A pixel (b, a) covers beam elevation `elevations[b]` and the azimuth
`azimuth_start + a * azimuth_step`; projection snaps a point to the nearest
beam and the nearest azimuth sample. Depth is the Euclidean range from the
sensor origin, computed through `cloud.ranges` everywhere so that projecting
a simulated scan reproduces its range image bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..geometry.pose import Pose
from .cloud import PointCloud, ranges
from .config import TWO_PI, LidarConfig

SINGLE_BEAM_ELEV_TOL = 0.02   # rad; elevation acceptance window when B == 1


@dataclass
class RangeImage:
    """B x A depth grid in meters; 0 where the mask is false."""

    depth: np.ndarray
    mask: np.ndarray
    config: Optional[LidarConfig] = None
    incidence: Optional[np.ndarray] = None   # |cos| of ray/surface angle per pixel

    def __post_init__(self):
        self.depth = np.asarray(self.depth, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.depth.shape != self.mask.shape or self.depth.ndim != 2:
            raise ValueError("depth and mask must be matching 2D grids")
        if np.any(self.depth[~self.mask] != 0.0):
            raise ValueError("masked-out pixels must carry depth 0")
        if np.any(self.depth[self.mask] <= 0.0):
            raise ValueError("valid pixels must carry positive depth")
        if self.config is not None:
            if self.depth.shape != (self.config.n_beams, self.config.azimuth_count):
                raise ValueError("grid shape does not match the sensor config")
            if np.any(self.depth > self.config.max_range):
                raise ValueError("depth exceeds the configured max range")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.depth.shape

    def n_valid(self) -> int:
        return int(self.mask.sum())


def beam_directions(cfg: LidarConfig) -> np.ndarray:
    """(B, A, 3) unit directions in the sensor frame."""
    el = cfg.elevations[:, None]
    az = cfg.azimuths()[None, :]
    ce = np.cos(el)
    return np.stack([ce * np.cos(az), ce * np.sin(az),
                     np.broadcast_to(np.sin(el), (cfg.n_beams, cfg.azimuth_count))],
                    axis=-1)


def _nearest_beam(cfg: LidarConfig, elev: np.ndarray):
    """Nearest beam index per elevation, plus an in-FOV acceptance mask."""
    e = cfg.elevations
    if len(e) == 1:
        beam = np.zeros(len(elev), dtype=np.int64)
        ok = np.abs(elev - e[0]) <= SINGLE_BEAM_ELEV_TOL
        return beam, ok
    asc = e[::-1]
    pos = np.searchsorted(asc, elev)
    lo = np.clip(pos - 1, 0, len(e) - 1)
    hi = np.clip(pos, 0, len(e) - 1)
    pick_hi = np.abs(asc[hi] - elev) < np.abs(asc[lo] - elev)
    idx_asc = np.where(pick_hi, hi, lo)
    beam = len(e) - 1 - idx_asc
    # accept within half the gap to the adjacent beam (one-sided at the ends)
    gaps = np.abs(np.diff(e))
    half = np.empty(len(e))
    half[0] = gaps[0] / 2.0
    half[-1] = gaps[-1] / 2.0
    if len(e) > 2:
        half[1:-1] = np.maximum(gaps[:-1], gaps[1:]) / 2.0
    ok = np.abs(e[beam] - elev) <= half[beam]
    return beam, ok


def _azimuth_bin(cfg: LidarConfig, az: np.ndarray):
    rel = np.mod(az - cfg.azimuth_start, TWO_PI)
    bin_f = np.round(rel / cfg.azimuth_step).astype(np.int64)
    if cfg.full_revolution:
        return np.mod(bin_f, cfg.azimuth_count), np.ones(len(az), dtype=bool)
    ok = (bin_f >= 0) & (bin_f < cfg.azimuth_count)
    ok &= np.abs(rel - bin_f * cfg.azimuth_step) <= cfg.azimuth_step / 2.0 + 1e-12
    return np.clip(bin_f, 0, cfg.azimuth_count - 1), ok


def project_to_range_image(pc: PointCloud, cfg: LidarConfig,
                           return_dropped: bool = False):
    """Bin a sensor-frame cloud into a range image.

    Pixel collisions keep the smaller depth; points outside the field of view
    or range gate are dropped (their count is available via return_dropped).
    """
    depth_img = np.zeros((cfg.n_beams, cfg.azimuth_count))
    mask = np.zeros((cfg.n_beams, cfg.azimuth_count), dtype=bool)
    pts = pc.points
    if len(pts) == 0:
        img = RangeImage(depth_img, mask, cfg)
        return (img, 0) if return_dropped else img

    r = ranges(pts)
    keep = (r >= cfg.min_range) & (r <= cfg.max_range)
    elev = np.arcsin(np.clip(pts[:, 2] / np.where(r == 0, 1.0, r), -1.0, 1.0))
    az = np.arctan2(pts[:, 1], pts[:, 0])
    beam, ok_b = _nearest_beam(cfg, elev)
    abin, ok_a = _azimuth_bin(cfg, az)
    keep &= ok_b & ok_a
    dropped = int((~keep).sum())

    r, beam, abin = r[keep], beam[keep], abin[keep]
    order = np.argsort(-r, kind="stable")      # write nearest last
    depth_img[beam[order], abin[order]] = r[order]
    mask[beam[order], abin[order]] = True
    img = RangeImage(depth_img, mask, cfg)
    return (img, dropped) if return_dropped else img


def unproject(r: RangeImage, cfg: LidarConfig, ego: Pose) -> PointCloud:
    """Valid pixels back to 3D points, placed in the world frame via
    ego compose sensor_offset (identity ego yields the sensor frame)."""
    dirs = beam_directions(cfg)
    b, a = np.nonzero(r.mask)
    pts_sensor = dirs[b, a] * r.depth[b, a][:, None]
    world = ego @ cfg.sensor_offset
    return PointCloud(world.apply(pts_sensor), frame="world",
                      beam=b.astype(np.int32), azimuth=a.astype(np.int32))
