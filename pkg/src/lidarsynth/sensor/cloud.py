"""Point clouds with optional per-point sensor/beam metadata."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..geometry.pose import Pose


def ranges(points: np.ndarray) -> np.ndarray:
    """Euclidean norms, componentwise so every caller rounds identically."""
    p = np.asarray(points, dtype=np.float64)
    return np.sqrt(p[..., 0] ** 2 + p[..., 1] ** 2 + p[..., 2] ** 2)


@dataclass
class PointCloud:
    points: np.ndarray
    frame: str = "sensor"                      # "sensor", "ego", or "world"
    beam: Optional[np.ndarray] = None
    azimuth: Optional[np.ndarray] = None
    label: Optional[np.ndarray] = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if not np.all(np.isfinite(self.points)):
            raise ValueError("point coordinates must be finite")
        for name in ("beam", "azimuth", "label"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=np.int32).reshape(-1)
                if len(v) != len(self.points):
                    raise ValueError(f"{name} must have one entry per point")
                setattr(self, name, v)

    def __len__(self) -> int:
        return len(self.points)

    def subset(self, mask_or_indices) -> "PointCloud":
        sel = np.asarray(mask_or_indices)
        return PointCloud(
            self.points[sel], self.frame,
            None if self.beam is None else self.beam[sel],
            None if self.azimuth is None else self.azimuth[sel],
            None if self.label is None else self.label[sel])

    def transformed(self, pose: Pose, frame: Optional[str] = None) -> "PointCloud":
        return PointCloud(pose.apply(self.points), frame or self.frame,
                          self.beam, self.azimuth, self.label)
