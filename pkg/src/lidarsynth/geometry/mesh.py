"""Triangle meshes and rigid transforms on them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .pose import Pose


@dataclass
class TriMesh:
    """Indexed triangle set with an optional per-triangle integer label."""

    vertices: np.ndarray
    triangles: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int32).reshape(-1, 3)
        if self.labels is not None:
            self.labels = np.ascontiguousarray(self.labels, dtype=np.int32).reshape(-1)
            if self.labels.shape[0] != self.triangles.shape[0]:
                raise ValueError("labels must be one per triangle")
        if not np.all(np.isfinite(self.vertices)):
            raise ValueError("vertex coordinates must be finite")
        if self.triangles.size:
            if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
                raise ValueError("triangle index out of range")
            a, b, c = self.triangles.T
            if np.any((a == b) | (b == c) | (a == c)):
                raise ValueError("triangle with repeated vertex index")

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def is_empty(self) -> bool:
        return self.triangles.shape[0] == 0

    def aabb(self):
        """(min, max) corners over all vertices; raises on an empty mesh."""
        if len(self.vertices) == 0:
            raise ValueError("empty mesh has no bounding box")
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def triangle_corners(self):
        """Per-triangle corner arrays (v0, v1, v2), each (M, 3)."""
        tri = self.vertices[self.triangles]
        return tri[:, 0], tri[:, 1], tri[:, 2]

    def volume(self) -> float:
        """Signed enclosed volume via the divergence theorem (watertight meshes)."""
        v0, v1, v2 = self.triangle_corners()
        return float(np.einsum("ij,ij->i", v0, np.cross(v1, v2)).sum() / 6.0)


def transform_mesh(mesh: TriMesh, pose: Pose) -> TriMesh:
    """Apply a rigid transform to every vertex; topology and labels are shared."""
    return TriMesh(pose.apply(mesh.vertices), mesh.triangles,
                   None if mesh.labels is None else mesh.labels)


def scale_mesh(mesh: TriMesh, scale, center=None) -> TriMesh:
    """Anisotropic scale about `center` (default: AABB center)."""
    scale = np.asarray(scale, dtype=float).reshape(3)
    if np.any(scale <= 0.0):
        raise ValueError("scale factors must be positive")
    if center is None:
        lo, hi = mesh.aabb()
        center = (lo + hi) / 2.0
    verts = (mesh.vertices - center) * scale + center
    return TriMesh(verts, mesh.triangles,
                   None if mesh.labels is None else mesh.labels)


def concat_meshes(meshes, labels=None) -> TriMesh:
    """Concatenate meshes into one; `labels` optionally gives one label per input."""
    meshes = list(meshes)
    if not meshes:
        return TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32))
    verts, tris, labs = [], [], []
    offset = 0
    for i, m in enumerate(meshes):
        verts.append(m.vertices)
        tris.append(m.triangles + offset)
        if labels is not None:
            labs.append(np.full(m.n_triangles, labels[i], dtype=np.int32))
        elif m.labels is not None:
            labs.append(m.labels)
        else:
            labs.append(np.zeros(m.n_triangles, dtype=np.int32))
        offset += len(m.vertices)
    return TriMesh(np.concatenate(verts), np.concatenate(tris), np.concatenate(labs))


def box_mesh(half_extents, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Axis-aligned box with outward-facing triangles."""
    h = np.asarray(half_extents, dtype=float).reshape(3)
    if np.any(h <= 0.0):
        raise ValueError("half extents must be positive")
    c = np.asarray(center, dtype=float).reshape(3)
    corners = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)],
                       dtype=float)
    verts = corners * h + c
    # indices: bit 2 = x, bit 1 = y, bit 0 = z
    faces = np.array([
        [0, 1, 3], [0, 3, 2],  # -x
        [4, 6, 7], [4, 7, 5],  # +x
        [0, 4, 5], [0, 5, 1],  # -y
        [2, 3, 7], [2, 7, 6],  # +y
        [0, 2, 6], [0, 6, 4],  # -z
        [1, 5, 7], [1, 7, 3],  # +z
    ], dtype=np.int32)
    return TriMesh(verts, faces)


def plane_mesh(half_size: float, z: float = 0.0, cells: int = 1) -> TriMesh:
    """Square planar patch at height z, triangulated as a `cells`-by-`cells` grid."""
    n = cells + 1
    xs = np.linspace(-half_size, half_size, n)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    verts = np.stack([gx.ravel(), gy.ravel(), np.full(n * n, z)], axis=1)
    idx = np.arange(n * n).reshape(n, n)
    a = idx[:-1, :-1].ravel()
    b = idx[1:, :-1].ravel()
    c = idx[1:, 1:].ravel()
    d = idx[:-1, 1:].ravel()
    tris = np.concatenate([np.stack([a, b, c], axis=1), np.stack([a, c, d], axis=1)])
    return TriMesh(verts, tris.astype(np.int32))
