"""Top-down semantic layouts and vector maps.

A SemanticLayout is an L x W grid of boolean channels, one per map class.
`origin` is the position of the center of cell (0, 0) in the layout's own
frame; rasterize_map produces layouts centered on the query pose, so the
layout frame is the center frame.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

DEFAULT_CLASSES = ("lane_markings", "road_lines", "edges", "crosswalks", "driveways")
DRIVABLE_CLASSES = ("lane_markings", "road_lines")


@dataclass
class SemanticLayout:
    channels: np.ndarray                    # (M, L, W) boolean
    resolution: float                       # meters per cell
    origin: np.ndarray                      # (2,) position of cell (0, 0) center
    class_names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        self.channels = np.asarray(self.channels, dtype=bool)
        self.origin = np.asarray(self.origin, dtype=np.float64).reshape(2)
        if self.channels.ndim != 3 or self.channels.shape[0] < 1:
            raise ValueError("channels must be (M, L, W) with M >= 1")
        if self.resolution <= 0.0:
            raise ValueError("resolution must be positive")
        if self.class_names is None and self.channels.shape[0] == len(DEFAULT_CLASSES):
            self.class_names = DEFAULT_CLASSES
        if self.class_names is not None and len(self.class_names) != self.channels.shape[0]:
            raise ValueError("one class name per channel")

    @property
    def dims(self) -> Tuple[int, int]:
        return self.channels.shape[1], self.channels.shape[2]

    def cell_centers(self) -> Tuple[np.ndarray, np.ndarray]:
        l, w = self.dims
        xs = self.origin[0] + self.resolution * np.arange(l)
        ys = self.origin[1] + self.resolution * np.arange(w)
        return xs, ys

    def drivable_cells(self) -> np.ndarray:
        """(N, 2) cell indices where any drivable-class channel is set."""
        if self.class_names is None:
            sel = self.channels[:min(2, len(self.channels))]
        else:
            idx = [i for i, n in enumerate(self.class_names) if n in DRIVABLE_CLASSES]
            sel = self.channels[idx] if idx else self.channels[:0]
        if sel.shape[0] == 0:
            return np.zeros((0, 2), dtype=np.int64)
        mask = sel.any(axis=0)
        return np.argwhere(mask)


@dataclass
class VectorMap:
    """Class-tagged polylines, each an (K >= 2, 2) array of xy points."""

    polylines: List[Tuple[np.ndarray, int]]
    class_names: Tuple[str, ...] = DEFAULT_CLASSES

    def __post_init__(self):
        checked = []
        for pts, cls in self.polylines:
            pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
            if len(pts) < 2:
                raise ValueError("polylines need at least two points")
            if not (0 <= int(cls) < len(self.class_names)):
                raise ValueError(f"class id {cls} out of range")
            checked.append((pts, int(cls)))
        self.polylines = checked

    def to_dict(self) -> dict:
        return {
            "classes": list(self.class_names),
            "polylines": [
                {"class": self.class_names[cls], "points": pts.tolist()}
                for pts, cls in self.polylines
            ],
        }

    @staticmethod
    def from_dict(d: dict) -> "VectorMap":
        classes = tuple(d.get("classes", DEFAULT_CLASSES))
        polys = []
        for entry in d["polylines"]:
            cls = entry["class"]
            cls_id = classes.index(cls) if isinstance(cls, str) else int(cls)
            polys.append((np.asarray(entry["points"], dtype=float), cls_id))
        return VectorMap(polys, classes)

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)

    @staticmethod
    def load(path) -> "VectorMap":
        with open(path) as f:
            return VectorMap.from_dict(json.load(f))


def rasterize_map(vm: VectorMap, center, dims, resolution: float) -> SemanticLayout:
    """Burn polylines into a boolean grid centered on `center` = (x, y, heading).

    A cell is set in channel c when any class-c segment passes within
    resolution/2 of the cell center, measured in the center frame.
    """
    l, w = int(dims[0]), int(dims[1])
    if l < 1 or w < 1:
        raise ValueError("dims must be at least 1 x 1")
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    cx, cy, heading = float(center[0]), float(center[1]), float(center[2])
    cos_h, sin_h = np.cos(-heading), np.sin(-heading)
    rot = np.array([[cos_h, -sin_h], [sin_h, cos_h]])

    origin = np.array([-(l - 1) / 2.0 * resolution, -(w - 1) / 2.0 * resolution])
    channels = np.zeros((len(vm.class_names), l, w), dtype=bool)
    brush = resolution / 2.0

    for pts, cls in vm.polylines:
        local = (pts - np.array([cx, cy])) @ rot.T
        for p, q in zip(local[:-1], local[1:]):
            _burn_segment(channels[cls], p, q, origin, resolution, brush)
    return SemanticLayout(channels, resolution, origin, vm.class_names)


def _burn_segment(plane: np.ndarray, p: np.ndarray, q: np.ndarray,
                  origin: np.ndarray, res: float, brush: float):
    l, w = plane.shape
    lo = np.minimum(p, q) - brush
    hi = np.maximum(p, q) + brush
    i0 = max(0, int(np.ceil((lo[0] - origin[0]) / res)))
    i1 = min(l - 1, int(np.floor((hi[0] - origin[0]) / res)))
    j0 = max(0, int(np.ceil((lo[1] - origin[1]) / res)))
    j1 = min(w - 1, int(np.floor((hi[1] - origin[1]) / res)))
    if i0 > i1 or j0 > j1:
        return
    xs = origin[0] + res * np.arange(i0, i1 + 1)
    ys = origin[1] + res * np.arange(j0, j1 + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")

    d = q - p
    len2 = d @ d
    if len2 == 0.0:
        dist2 = (gx - p[0]) ** 2 + (gy - p[1]) ** 2
    else:
        t = ((gx - p[0]) * d[0] + (gy - p[1]) * d[1]) / len2
        t = np.clip(t, 0.0, 1.0)
        dist2 = (gx - (p[0] + t * d[0])) ** 2 + (gy - (p[1] + t * d[1])) ** 2
    plane[i0:i1 + 1, j0:j1 + 1] |= dist2 <= brush * brush
