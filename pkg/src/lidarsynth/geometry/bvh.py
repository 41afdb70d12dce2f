"""Bounding volume hierarchy over a triangle mesh, plus ray queries.

Construction sorts triangles once along a Morton curve of their centroids and
then splits ranges at the median, so the whole build is numpy-vectorized:
one sort, a level-synchronous split loop, and bottom-up AABB unions. Leaf
triangle ids are stored in ascending order so that equal-distance hits
deterministically resolve to the lowest triangle id in every backend,
including the brute-force reference cast.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .._kernels import raycast_kernel
from .._kernels.fallback import moller_trumbore
from .mesh import TriMesh

LEAF_SIZE = 4
SELF_HIT_EPS = 1e-6        # hits closer than this are treated as self-intersections
DEGENERATE_AREA_EPS = 1e-12
UNIT_DIR_TOL = 1e-9


@dataclass
class Hit:
    distance: float
    point: np.ndarray
    normal: np.ndarray
    triangle_id: int


def _spread_bits(v: np.ndarray) -> np.ndarray:
    """Spread 10-bit integers so their bits sit three positions apart."""
    v = v.astype(np.int64)
    v = (v | (v << 16)) & 0x030000FF
    v = (v | (v << 8)) & 0x0300F00F
    v = (v | (v << 4)) & 0x030C30C3
    v = (v | (v << 2)) & 0x09249249
    return v


def _morton_codes(points: np.ndarray) -> np.ndarray:
    lo = points.min(axis=0)
    span = points.max(axis=0) - lo
    span[span == 0.0] = 1.0
    q = np.clip((points - lo) / span * 1023.0, 0, 1023).astype(np.int64)
    return (_spread_bits(q[:, 0]) << 2) | (_spread_bits(q[:, 1]) << 1) \
        | _spread_bits(q[:, 2])


class Bvh:
    """Immutable accelerator over a TriMesh; safe to share across threads."""

    def __init__(self, mesh: TriMesh, leaf_size: int = LEAF_SIZE):
        if mesh.is_empty():
            raise ValueError("cannot build a BVH over an empty mesh")
        self.mesh = mesh
        v0, v1, v2 = mesh.triangle_corners()
        self.v0 = np.ascontiguousarray(v0)
        self.e1 = np.ascontiguousarray(v1 - v0)
        self.e2 = np.ascontiguousarray(v2 - v0)

        area2 = np.linalg.norm(np.cross(self.e1, self.e2), axis=1)
        keep = area2 > DEGENERATE_AREA_EPS
        self.n_degenerate = int((~keep).sum())
        ids = np.nonzero(keep)[0].astype(np.int32)
        if ids.size == 0:
            raise ValueError("mesh has no non-degenerate triangles")

        self.tri_min = np.minimum(np.minimum(v0, v1), v2)
        self.tri_max = np.maximum(np.maximum(v0, v1), v2)
        centroids = (self.tri_min[ids] + self.tri_max[ids]) / 2.0

        order = np.argsort(_morton_codes(centroids), kind="stable")
        prim = ids[order].astype(np.int32)
        n = len(prim)

        # level-synchronous median splits over the Morton-sorted range
        starts = [np.array([0])]
        counts = [np.array([n])]
        lefts = [np.full(1, -1, dtype=np.int64)]
        rights = [np.full(1, -1, dtype=np.int64)]
        level_slices = [(0, 1)]
        total = 1
        frontier = 0
        while True:
            fs, fc = starts[frontier], counts[frontier]
            split = fc > leaf_size
            if not split.any():
                break
            lc = fc[split] // 2
            child_start = np.empty(2 * lc.size, dtype=np.int64)
            child_count = np.empty(2 * lc.size, dtype=np.int64)
            child_start[0::2] = fs[split]
            child_count[0::2] = lc
            child_start[1::2] = fs[split] + lc
            child_count[1::2] = fc[split] - lc
            child_ids = total + np.arange(2 * lc.size)
            base = level_slices[frontier][0]
            parent_ids = base + np.nonzero(split)[0]
            lefts[frontier][split] = child_ids[0::2]
            rights[frontier][split] = child_ids[1::2]
            starts.append(child_start)
            counts.append(child_count)
            lefts.append(np.full(child_ids.size, -1, dtype=np.int64))
            rights.append(np.full(child_ids.size, -1, dtype=np.int64))
            level_slices.append((total, total + child_ids.size))
            total += child_ids.size
            frontier += 1

        node_start = np.concatenate(starts)
        node_count = np.concatenate(counts)
        node_left = np.concatenate(lefts)
        node_right = np.concatenate(rights)

        # sort each leaf's slice by triangle id for deterministic tie-breaks
        is_leaf = node_left < 0
        leaf_ids = np.nonzero(is_leaf)[0]
        by_start = leaf_ids[np.argsort(node_start[leaf_ids])]
        leaf_of = np.repeat(by_start, node_count[by_start])
        resort = np.lexsort((prim, leaf_of))
        prim = prim[resort]

        # bottom-up AABBs: leaves by segmented reduction, parents by union
        node_min = np.empty((total, 3))
        node_max = np.empty((total, 3))
        seg = node_start[by_start]
        node_min[by_start] = np.minimum.reduceat(self.tri_min[prim], seg, axis=0)
        node_max[by_start] = np.maximum.reduceat(self.tri_max[prim], seg, axis=0)
        for lo, hi in reversed(level_slices):
            inner = np.arange(lo, hi)[~is_leaf[lo:hi]]
            if inner.size:
                node_min[inner] = np.minimum(node_min[node_left[inner]],
                                             node_min[node_right[inner]])
                node_max[inner] = np.maximum(node_max[node_left[inner]],
                                             node_max[node_right[inner]])

        self.node_min = np.ascontiguousarray(node_min)
        self.node_max = np.ascontiguousarray(node_max)
        self.node_left = np.ascontiguousarray(node_left, dtype=np.int32)
        self.node_right = np.ascontiguousarray(node_right, dtype=np.int32)
        self.node_start = np.ascontiguousarray(node_start, dtype=np.int32)
        self.node_count = np.ascontiguousarray(node_count, dtype=np.int32)
        self.prim = np.ascontiguousarray(prim, dtype=np.int32)

    @property
    def n_nodes(self) -> int:
        return len(self.node_left)

    def aabb_query(self, lo, hi) -> np.ndarray:
        """Triangle ids whose AABB overlaps the query box [lo, hi]."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        out = []
        stack = [0]
        while stack:
            node = stack.pop()
            if (np.any(self.node_min[node] > hi) or np.any(self.node_max[node] < lo)):
                continue
            if self.node_left[node] < 0:
                s, c = self.node_start[node], self.node_count[node]
                ids = self.prim[s:s + c]
                overlap = (np.all(self.tri_min[ids] <= hi, axis=1)
                           & np.all(self.tri_max[ids] >= lo, axis=1))
                out.append(ids[overlap])
            else:
                stack.append(self.node_right[node])
                stack.append(self.node_left[node])
        if not out:
            return np.empty(0, dtype=np.int32)
        return np.concatenate(out)


def build_bvh(mesh: TriMesh, leaf_size: int = LEAF_SIZE) -> Bvh:
    return Bvh(mesh, leaf_size=leaf_size)


def _check_unit(dirs: np.ndarray):
    err = np.abs(_norms(dirs) - 1.0)
    if np.any(err > UNIT_DIR_TOL):
        raise ValueError("ray directions must be unit length")


def _norms(v: np.ndarray) -> np.ndarray:
    return np.sqrt(v[..., 0] ** 2 + v[..., 1] ** 2 + v[..., 2] ** 2)


def raycast_batch(bvh: Bvh, origins: np.ndarray, dirs: np.ndarray,
                  max_range: float):
    """Cast many rays; returns (t, tri) arrays with inf / -1 for misses."""
    origins = np.ascontiguousarray(origins, dtype=np.float64).reshape(-1, 3)
    dirs = np.ascontiguousarray(dirs, dtype=np.float64).reshape(-1, 3)
    if max_range <= 0.0:
        raise ValueError("max_range must be positive")
    _check_unit(dirs)
    return raycast_kernel(bvh.node_min, bvh.node_max, bvh.node_left, bvh.node_right,
                          bvh.node_start, bvh.node_count, bvh.prim,
                          bvh.v0, bvh.e1, bvh.e2, origins, dirs,
                          float(max_range), SELF_HIT_EPS)


def hit_normals(mesh: TriMesh, tri_ids: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Unit triangle normals oriented to face the ray origins (dot(n, d) <= 0)."""
    v0, v1, v2 = mesh.triangle_corners()
    n = np.cross(v1[tri_ids] - v0[tri_ids], v2[tri_ids] - v0[tri_ids])
    n /= np.linalg.norm(n, axis=-1, keepdims=True)
    flip = np.einsum("ij,ij->i", n, np.atleast_2d(dirs)) > 0.0
    n[flip] *= -1.0
    return n


def raycast(bvh: Bvh, origin, direction, max_range: float) -> Optional[Hit]:
    """Nearest hit along a single ray, or None."""
    origin = np.asarray(origin, dtype=float).reshape(3)
    direction = np.asarray(direction, dtype=float).reshape(3)
    t, tri = raycast_batch(bvh, origin[None], direction[None], max_range)
    if tri[0] < 0:
        return None
    point = origin + t[0] * direction
    normal = hit_normals(bvh.mesh, tri[:1], direction[None])[0]
    return Hit(float(t[0]), point, normal, int(tri[0]))


def raycast_brute_force(mesh: TriMesh, origins: np.ndarray, dirs: np.ndarray,
                        max_range: float, t_min: float = SELF_HIT_EPS,
                        chunk: int = 256):
    """Reference cast testing every ray against every triangle.

    Independent of the BVH traversal; used as the oracle in tests. Ties at
    equal distance resolve to the lowest triangle id, like the accelerated
    path.
    """
    origins = np.asarray(origins, dtype=np.float64).reshape(-1, 3)
    dirs = np.asarray(dirs, dtype=np.float64).reshape(-1, 3)
    v0, v1, v2 = mesh.triangle_corners()
    e1 = v1 - v0
    e2 = v2 - v0
    n_rays = len(origins)
    best_t = np.full(n_rays, np.inf)
    best_id = np.full(n_rays, -1, dtype=np.int32)
    for s in range(0, n_rays, chunk):
        sl = slice(s, min(s + chunk, n_rays))
        t = moller_trumbore(origins[sl], dirs[sl], v0, e1, e2, max_range, t_min)
        col = np.argmin(t, axis=1)
        rows = np.arange(t.shape[0])
        best_t[sl] = t[rows, col]
        best_id[sl] = np.where(np.isinf(best_t[sl]), -1, col).astype(np.int32)
    return best_t, best_id
