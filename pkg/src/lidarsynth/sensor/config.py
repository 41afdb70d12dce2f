"""Spinning-LiDAR beam configurations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
import numpy as np

from ..geometry.pose import Pose

TWO_PI = 2.0 * np.pi


@dataclass
class LidarConfig:
    """Beam layout: B elevation angles (strictly decreasing, radians) swept
    over `azimuth_count` steps of [azimuth_start, azimuth_end)."""

    elevations: np.ndarray
    azimuth_count: int
    azimuth_start: float = 0.0
    azimuth_end: float = TWO_PI
    max_range: float = 120.0
    min_range: float = 0.5
    sensor_offset: Pose = field(default_factory=Pose.identity)

    def __post_init__(self):
        self.elevations = np.asarray(self.elevations, dtype=np.float64).reshape(-1)
        if len(self.elevations) < 1:
            raise ValueError("need at least one beam")
        if len(self.elevations) > 1 and not np.all(np.diff(self.elevations) < 0):
            raise ValueError("elevations must be strictly decreasing")
        if self.azimuth_count < 1:
            raise ValueError("azimuth_count must be >= 1")
        if self.azimuth_end <= self.azimuth_start:
            raise ValueError("azimuth range must be non-empty")
        if not (0.0 < self.min_range < self.max_range):
            raise ValueError("need 0 < min_range < max_range")

    @property
    def n_beams(self) -> int:
        return len(self.elevations)

    @property
    def azimuth_step(self) -> float:
        return (self.azimuth_end - self.azimuth_start) / self.azimuth_count

    @property
    def full_revolution(self) -> bool:
        return abs((self.azimuth_end - self.azimuth_start) - TWO_PI) < 1e-9

    def azimuths(self) -> np.ndarray:
        return self.azimuth_start + self.azimuth_step * np.arange(self.azimuth_count)

    @staticmethod
    def uniform(n_beams: int, fov_top: float, fov_bottom: float,
                azimuth_count: int, **kwargs) -> "LidarConfig":
        """Evenly spaced beams from fov_top down to fov_bottom (radians)."""
        if n_beams == 1:
            elev = np.array([fov_top])
        else:
            elev = np.linspace(fov_top, fov_bottom, n_beams)
        return LidarConfig(elev, azimuth_count, **kwargs)

    def to_dict(self) -> dict:
        return {
            "elevations": self.elevations.tolist(),
            "azimuth_count": int(self.azimuth_count),
            "azimuth_start": float(self.azimuth_start),
            "azimuth_end": float(self.azimuth_end),
            "max_range": float(self.max_range),
            "min_range": float(self.min_range),
            "sensor_offset": self.sensor_offset.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "LidarConfig":
        offset = d.get("sensor_offset")
        return LidarConfig(
            np.asarray(d["elevations"], dtype=float),
            int(d["azimuth_count"]),
            float(d.get("azimuth_start", 0.0)),
            float(d.get("azimuth_end", TWO_PI)),
            float(d.get("max_range", 120.0)),
            float(d.get("min_range", 0.5)),
            Pose.identity() if offset is None else Pose.from_dict(offset))

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)

    @staticmethod
    def load(path) -> "LidarConfig":
        with open(path) as f:
            return LidarConfig.from_dict(json.load(f))
