"""Nearest-neighbor queries: KD-tree with a brute-force path for small sets."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

BRUTE_FORCE_LIMIT = 512


def nearest_neighbors(points: np.ndarray, queries: np.ndarray,
                      force_brute: bool = False):
    """(distances, indices) of the nearest point for each query."""
    points = np.asarray(points, dtype=np.float64)
    queries = np.asarray(queries, dtype=np.float64)
    if len(points) == 0:
        raise ValueError("empty reference set")
    if force_brute or len(points) <= BRUTE_FORCE_LIMIT:
        d2 = ((queries[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
        idx = np.argmin(d2, axis=1)
        return np.sqrt(d2[np.arange(len(queries)), idx]), idx
    dist, idx = cKDTree(points).query(queries, k=1)
    return np.asarray(dist, dtype=np.float64), np.asarray(idx, dtype=np.int64)


def knn_indices(points: np.ndarray, k: int) -> np.ndarray:
    """(N, k) indices of each point's k nearest neighbors (self included)."""
    points = np.asarray(points, dtype=np.float64)
    if k > len(points):
        raise ValueError(f"k={k} exceeds the point count {len(points)}")
    _, idx = cKDTree(points).query(points, k=k)
    return np.atleast_2d(idx)
