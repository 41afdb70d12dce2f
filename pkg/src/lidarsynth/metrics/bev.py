"""Bird's-eye-view occupancy histograms and the two-sample scores over them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..sensor.cloud import PointCloud

DEFAULT_EXTENT = 50.0
DEFAULT_GRID = 100
DEFAULT_Z_SLAB = (-3.0, 5.0)


@dataclass
class BevHistogram:
    """Occupancy counts on a G x G grid spanning +-extent around the sensor.

    A single sample holds 0/1 occupancy; aggregates hold sums over samples.
    """

    counts: np.ndarray
    extent: float
    resolution: float

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.float64)
        if self.counts.ndim != 2 or self.counts.shape[0] != self.counts.shape[1]:
            raise ValueError("counts must be a square grid")
        if self.extent <= 0.0 or np.any(self.counts < 0):
            raise ValueError("extent must be positive and counts non-negative")

    @property
    def grid(self) -> int:
        return self.counts.shape[0]

    def normalized(self) -> np.ndarray:
        total = self.counts.sum()
        return self.counts.reshape(-1) / total if total > 0 else self.counts.reshape(-1)


def bev_histogram(pc: PointCloud, extent: float = DEFAULT_EXTENT,
                  grid: int = DEFAULT_GRID, z_slab=DEFAULT_Z_SLAB) -> BevHistogram:
    """Boolean occupancy: a cell is set when at least one point falls in it."""
    if grid < 1:
        raise ValueError("grid must be >= 1")
    occ = np.zeros((grid, grid), dtype=bool)
    pts = pc.points
    if len(pts):
        z_ok = (pts[:, 2] >= z_slab[0]) & (pts[:, 2] <= z_slab[1])
        pts = pts[z_ok]
        res = 2.0 * extent / grid
        ix = np.floor((pts[:, 0] + extent) / res).astype(np.int64)
        iy = np.floor((pts[:, 1] + extent) / res).astype(np.int64)
        ok = (ix >= 0) & (ix < grid) & (iy >= 0) & (iy < grid)
        occ[ix[ok], iy[ok]] = True
    return BevHistogram(occ.astype(np.float64), extent, 2.0 * extent / grid)


def aggregate(histograms: Sequence[BevHistogram]) -> BevHistogram:
    if not histograms:
        raise ValueError("nothing to aggregate")
    counts = np.sum([h.counts for h in histograms], axis=0)
    return BevHistogram(counts, histograms[0].extent, histograms[0].resolution)


def occupancy_layout(h: BevHistogram):
    """Histogram as a single-channel SemanticLayout for LAYO-container export."""
    from ..world.layout import SemanticLayout
    origin = np.array([-h.extent + h.resolution / 2.0,
                       -h.extent + h.resolution / 2.0])
    return SemanticLayout((h.counts > 0)[None, :, :], h.resolution, origin,
                          class_names=("occupancy",))


def _pairwise_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", d, d)


def median_bandwidth(histograms_a, histograms_b) -> float:
    """Median pairwise distance over the pooled normalized histograms."""
    flat = np.stack([h.normalized() for h in list(histograms_a) + list(histograms_b)])
    d = np.sqrt(_pairwise_sq_dists(flat, flat))
    vals = d[np.triu_indices(len(flat), k=1)]
    vals = vals[vals > 0]
    return float(np.median(vals)) if len(vals) else 1.0


def mmd(set_a: Sequence[BevHistogram], set_b: Sequence[BevHistogram],
        bandwidth: float | None = None) -> float:
    """Squared maximum mean discrepancy with a Gaussian kernel, clamped at 0.

    Uses the unbiased estimator (diagonal excluded) for sets of two or more;
    a singleton set falls back to the biased estimator since the unbiased
    within-set term is undefined there.
    """
    if not set_a or not set_b:
        raise ValueError("both histogram sets must be non-empty")
    if bandwidth is None:
        bandwidth = median_bandwidth(set_a, set_b)
    if bandwidth <= 0.0:
        raise ValueError("bandwidth must be positive")
    a = np.stack([h.normalized() for h in set_a])
    b = np.stack([h.normalized() for h in set_b])
    gamma = 1.0 / (2.0 * bandwidth ** 2)

    def k(x, y):
        return np.exp(-gamma * _pairwise_sq_dists(x, y))

    def within(x):
        kxx = k(x, x)
        m = len(x)
        if m == 1:
            return float(kxx[0, 0])
        return float((kxx.sum() - np.trace(kxx)) / (m * (m - 1)))

    value = within(a) + within(b) - 2.0 * float(k(a, b).mean())
    return max(value, 0.0)


def jsd(agg_a: BevHistogram, agg_b: BevHistogram) -> float:
    """Jensen-Shannon divergence (natural log) between aggregate occupancies."""
    pa = np.asarray(agg_a.counts, dtype=np.float64).reshape(-1)
    pb = np.asarray(agg_b.counts, dtype=np.float64).reshape(-1)
    if pa.sum() <= 0 or pb.sum() <= 0:
        raise ValueError("aggregates must have positive total count")
    keep = (pa > 0) | (pb > 0)
    pa = pa[keep] / pa.sum()
    pb = pb[keep] / pb.sum()
    m = (pa + pb) / 2.0

    def kl(p, q):
        nz = p > 0
        return float(np.sum(p[nz] * np.log(p[nz] / q[nz])))

    return 0.5 * kl(pa, m) + 0.5 * kl(pb, m)
