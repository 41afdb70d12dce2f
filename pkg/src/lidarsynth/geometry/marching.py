"""Iso-surface extraction via classic marching cubes.

Per-cell cube indices are classified in one vectorized pass, intersection
vertices are interpolated per edge, and triangles are emitted per case group,
so no per-cell Python loop runs. Output is a triangle soup in world
coordinates (no vertex welding).
"""

from __future__ import annotations

import numpy as np

from .mc_tables import CORNER_OFFSETS, EDGE_CORNERS, EDGE_TABLE, TRI_TABLE
from .mesh import TriMesh
from .volume import TsdfVolume


def extract_mesh(vol: TsdfVolume, iso: float = 0.0) -> TriMesh:
    """Triangulate the iso level set of a TSDF volume.

    Returns an empty mesh when no cell straddles the iso value. Vertices are
    linearly interpolated along cube edges and placed in world coordinates
    using the volume's origin and voxel size.
    """
    values = np.asarray(vol.values, dtype=np.float64)
    nx, ny, nz = values.shape

    below = values < iso
    # cube index per cell: bit i set when corner i is below iso
    index = np.zeros((nx - 1, ny - 1, nz - 1), dtype=np.int32)
    for bit, (ox, oy, oz) in enumerate(CORNER_OFFSETS):
        corner = below[ox:nx - 1 + ox, oy:ny - 1 + oy, oz:nz - 1 + oz]
        index |= corner.astype(np.int32) << bit

    active = np.nonzero((index != 0) & (index != 255))
    if active[0].size == 0:
        return TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32))
    cell_idx = np.stack(active, axis=1)           # (C, 3) integer cell coords
    cases = index[active]                         # (C,)

    corner_vals = np.empty((len(cases), 8), dtype=np.float64)
    for i, (ox, oy, oz) in enumerate(CORNER_OFFSETS):
        corner_vals[:, i] = values[active[0] + ox, active[1] + oy, active[2] + oz]

    # interpolated crossing point on each of the 12 edges, for every active cell
    edge_points = np.full((len(cases), 12, 3), np.nan)
    edge_flags = EDGE_TABLE[cases]
    for e, (c1, c2) in enumerate(EDGE_CORNERS):
        needed = (edge_flags & (1 << e)) != 0
        if not needed.any():
            continue
        v1 = corner_vals[needed, c1]
        v2 = corner_vals[needed, c2]
        p1 = cell_idx[needed] + CORNER_OFFSETS[c1]
        p2 = cell_idx[needed] + CORNER_OFFSETS[c2]
        denom = v2 - v1
        t = np.where(np.abs(denom) < 1e-12, 0.0, (iso - v1) / np.where(denom == 0, 1.0, denom))
        pts = p1 + t[:, None] * (p2 - p1)
        edge_points[needed, e] = pts

    # emit triangles grouped by case so the table lookup stays vectorized
    tri_chunks = []
    for case in np.unique(cases):
        row = TRI_TABLE[case]
        n_edges = int((row >= 0).sum())
        if n_edges == 0:
            continue
        edges = row[:n_edges]                      # multiple of 3 edge ids
        members = cases == case
        pts = edge_points[members][:, edges, :]    # (Cc, n_edges, 3)
        tri_chunks.append(pts.reshape(-1, 3, 3))

    if not tri_chunks:
        return TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32))
    corners = np.concatenate(tri_chunks)           # (T, 3, 3) in voxel units
    verts = vol.origin + vol.voxel_size * corners.reshape(-1, 3)
    faces = np.arange(len(verts), dtype=np.int32).reshape(-1, 3)
    return TriMesh(verts, faces)
