"""Point-to-plane ICP, sequence consistency, and Chamfer distance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ..geometry.pose import Pose, axis_angle
from ..sensor.cloud import PointCloud
from .neighbors import knn_indices, nearest_neighbors

CORRESPONDENCE_CUTOFF = 1.0      # m; pairs farther apart are ignored per iteration
DEFAULT_TAU = 0.5                # m; outlier threshold for consistency reports


class IcpDegenerateError(RuntimeError):
    """Raised when the linearized system cannot determine a pose update."""

    def __init__(self, message: str, iteration: int, n_pairs: int):
        super().__init__(f"{message} (iteration {iteration}, {n_pairs} pairs)")
        self.iteration = iteration
        self.n_pairs = n_pairs


def estimate_normals(pc: PointCloud, k_neighbors: int = 10) -> np.ndarray:
    """Per-point unit normals from k-NN covariance, oriented toward the origin."""
    pts = pc.points
    if k_neighbors < 3:
        raise ValueError("k_neighbors must be >= 3")
    if len(pts) < k_neighbors:
        raise ValueError("fewer points than k_neighbors")
    idx = knn_indices(pts, k_neighbors)
    nb = pts[idx]                                   # (N, k, 3)
    centered = nb - nb.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", centered, centered) / k_neighbors
    _, vecs = np.linalg.eigh(cov)                   # ascending eigenvalues
    normals = vecs[:, :, 0]
    flip = np.einsum("ij,ij->i", normals, pts) > 0.0
    normals[flip] *= -1.0
    return normals


def point_to_plane(src: PointCloud, tgt: PointCloud,
                   tgt_normals: Optional[np.ndarray] = None) -> np.ndarray:
    """|n_j . (p - q_j)| against each source point's nearest target point."""
    if len(tgt) == 0:
        raise ValueError("empty target cloud")
    if tgt_normals is None:
        tgt_normals = estimate_normals(tgt)
    _, idx = nearest_neighbors(tgt.points, src.points)
    diff = src.points - tgt.points[idx]
    return np.abs(np.einsum("ij,ij->i", tgt_normals[idx], diff))


def icp_align(src: PointCloud, tgt: PointCloud, init: Pose,
              max_iters: int = 30, tol: float = 1e-6,
              max_correspondence: float = CORRESPONDENCE_CUTOFF,
              tgt_normals: Optional[np.ndarray] = None):
    """Point-to-plane ICP via the small-angle linearized 6x6 solve.

    Returns (pose, final mean point-to-plane energy over inlier pairs).
    """
    if len(src) < 10 or len(tgt) < 10:
        raise ValueError("both clouds need at least 10 points")
    if tgt_normals is None:
        tgt_normals = estimate_normals(tgt)

    pose = init
    prev_energy = np.inf
    energy = np.inf
    for it in range(max_iters):
        moved = pose.apply(src.points)
        dist, idx = nearest_neighbors(tgt.points, moved)
        sel = dist <= max_correspondence
        if sel.sum() < 6:
            raise IcpDegenerateError("too few correspondences", it, int(sel.sum()))
        p = moved[sel]
        q = tgt.points[idx[sel]]
        n = tgt_normals[idx[sel]]

        r = np.einsum("ij,ij->i", n, p - q)
        a = np.concatenate([np.cross(p, n), n], axis=1)    # (M, 6)
        h = a.T @ a
        g = -(a.T @ r)
        try:
            cond = np.linalg.cond(h)
            if not np.isfinite(cond) or cond > 1e12:
                raise np.linalg.LinAlgError(f"condition number {cond:.3g}")
            delta = np.linalg.solve(h, g)
        except np.linalg.LinAlgError as err:
            raise IcpDegenerateError(f"normal matrix is rank-deficient: {err}",
                                     it, len(p)) from err

        omega, t = delta[:3], delta[3:]
        update = Pose(axis_angle(omega, float(np.linalg.norm(omega))), t)
        pose = update @ pose

        moved = pose.apply(src.points)
        dist, idx = nearest_neighbors(tgt.points, moved)
        sel = dist <= max_correspondence
        if not sel.any():
            raise IcpDegenerateError("all correspondences rejected", it, 0)
        res = np.abs(np.einsum("ij,ij->i", tgt_normals[idx[sel]],
                               moved[sel] - tgt.points[idx[sel]]))
        energy = float(res.mean())
        if abs(prev_energy - energy) < tol:
            break
        prev_energy = energy
    return pose, energy


@dataclass
class ConsistencyReport:
    total_energy: float
    average_energy: float
    outlier_percentage: float
    poses: List[Pose]

    def to_dict(self) -> dict:
        return {
            "total_energy": self.total_energy,
            "average_energy": self.average_energy,
            "outlier_percentage": self.outlier_percentage,
            "n_pairs": len(self.poses),
        }


def sequence_consistency(scans: Sequence[PointCloud], tau: float = DEFAULT_TAU,
                         max_iters: int = 30, tol: float = 1e-6,
                         max_correspondence: float = CORRESPONDENCE_CUTOFF
                         ) -> ConsistencyReport:
    """Consecutive-pair ICP energies over a scan sequence.

    Each scan is aligned to its predecessor; the pair energy is the mean
    point-to-plane residual over all aligned source points, the total sums
    pair energies, the average divides by the number of pairs, and the outlier
    percentage pools every residual against the threshold tau.
    """
    if len(scans) < 2:
        raise ValueError("need at least two scans")
    poses = []
    pair_means = []
    n_outliers = 0
    n_points = 0
    for prev, curr in zip(scans[:-1], scans[1:]):
        normals = estimate_normals(prev)
        pose, _ = icp_align(curr, prev, Pose.identity(), max_iters=max_iters,
                            tol=tol, max_correspondence=max_correspondence,
                            tgt_normals=normals)
        aligned = PointCloud(pose.apply(curr.points), frame=curr.frame)
        res = point_to_plane(aligned, prev, tgt_normals=normals)
        poses.append(pose)
        pair_means.append(float(res.mean()))
        n_outliers += int((res > tau).sum())
        n_points += len(res)
    total = float(np.sum(pair_means))
    return ConsistencyReport(total, total / len(pair_means),
                             100.0 * n_outliers / n_points, poses)


def chamfer(a: PointCloud, b: PointCloud) -> float:
    """Symmetric mean nearest-neighbor distance between two clouds."""
    if len(a) == 0 or len(b) == 0:
        raise ValueError("chamfer distance needs non-empty clouds")
    d_ab, _ = nearest_neighbors(b.points, a.points)
    d_ba, _ = nearest_neighbors(a.points, b.points)
    return 0.5 * (float(d_ab.mean()) + float(d_ba.mean()))
