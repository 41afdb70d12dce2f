"""Truncated signed distance volumes.

Sign convention throughout: values are clamp(-d / trunc_dist, -1, 1) where d
is the conventional signed distance (positive outside the surface), so stored
values are negative outside and positive inside, and the surface is the zero
level set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

DEFAULT_TRUNC_VOXELS = 3.0


@dataclass
class Sphere:
    center: np.ndarray
    radius: float

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        return np.linalg.norm(points - c, axis=-1) - self.radius


@dataclass
class Box:
    center: np.ndarray
    half_extents: np.ndarray

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        q = np.abs(points - np.asarray(self.center, dtype=float)) - np.asarray(
            self.half_extents, dtype=float)
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
        inside = np.minimum(q.max(axis=-1), 0.0)
        return outside + inside


@dataclass
class Plane:
    """Half-space boundary: points with dot(normal, p) > offset are outside."""

    normal: np.ndarray
    offset: float

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        n = np.asarray(self.normal, dtype=float)
        n = n / np.linalg.norm(n)
        return points @ n - self.offset


Shape = Union[Sphere, Box, Plane]


@dataclass
class TsdfVolume:
    """Voxel grid of truncated signed distances, values[x, y, z] in [-1, 1].

    `origin` is the world position of the center of voxel (0, 0, 0).
    """

    values: np.ndarray
    voxel_size: float
    origin: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        self.origin = np.asarray(self.origin, dtype=float).reshape(3)
        if self.values.ndim != 3:
            raise ValueError("values must be a 3D array")
        if min(self.values.shape) < 2:
            raise ValueError("volume must be at least 2 voxels per axis")
        if self.voxel_size <= 0.0:
            raise ValueError("voxel_size must be positive")
        if self.values.size and (self.values.min() < -1.0 or self.values.max() > 1.0):
            raise ValueError("TSDF values must lie in [-1, 1]")

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.values.shape

    def voxel_centers_axis(self, axis: int) -> np.ndarray:
        n = self.values.shape[axis]
        return self.origin[axis] + self.voxel_size * np.arange(n)


def analytic_sdf(shape: Shape, dims, voxel_size: float, origin,
                 trunc_dist: float) -> TsdfVolume:
    """Sample an analytic shape into a truncated signed distance volume."""
    if voxel_size <= 0.0:
        raise ValueError("voxel_size must be positive")
    if trunc_dist <= 0.0:
        raise ValueError("trunc_dist must be positive")
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or min(dims) < 2:
        raise ValueError("dims must be three extents, each >= 2")
    origin = np.asarray(origin, dtype=float).reshape(3)

    xs = origin[0] + voxel_size * np.arange(dims[0])
    ys = origin[1] + voxel_size * np.arange(dims[1])
    zs = origin[2] + voxel_size * np.arange(dims[2])
    gx, gy, gz = np.meshgrid(xs, ys, zs, indexing="ij")
    pts = np.stack([gx, gy, gz], axis=-1)

    d = shape.signed_distance(pts)
    values = np.clip(-d / trunc_dist, -1.0, 1.0)
    return TsdfVolume(values.astype(np.float32), voxel_size, origin)


def union_sdf(shapes, dims, voxel_size: float, origin, trunc_dist: float) -> TsdfVolume:
    """Union of analytic shapes (minimum signed distance before truncation)."""
    if not shapes:
        raise ValueError("need at least one shape")
    dims = tuple(int(d) for d in dims)
    origin = np.asarray(origin, dtype=float).reshape(3)
    xs = origin[0] + voxel_size * np.arange(dims[0])
    ys = origin[1] + voxel_size * np.arange(dims[1])
    zs = origin[2] + voxel_size * np.arange(dims[2])
    gx, gy, gz = np.meshgrid(xs, ys, zs, indexing="ij")
    pts = np.stack([gx, gy, gz], axis=-1)

    d = shapes[0].signed_distance(pts)
    for s in shapes[1:]:
        d = np.minimum(d, s.signed_distance(pts))
    values = np.clip(-d / trunc_dist, -1.0, 1.0)
    return TsdfVolume(values.astype(np.float32), voxel_size, origin)
