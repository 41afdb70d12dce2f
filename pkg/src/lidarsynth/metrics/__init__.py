"""Realism and consistency metrics over point clouds."""

from .bev import (BevHistogram, aggregate, bev_histogram, jsd, median_bandwidth,
                  mmd)
from .neighbors import nearest_neighbors
from .registration import (ConsistencyReport, IcpDegenerateError, chamfer,
                           estimate_normals, icp_align, point_to_plane,
                           sequence_consistency)

__all__ = [
    "BevHistogram", "aggregate", "bev_histogram", "jsd", "median_bandwidth",
    "mmd", "nearest_neighbors", "ConsistencyReport", "IcpDegenerateError",
    "chamfer", "estimate_normals", "icp_align", "point_to_plane",
    "sequence_consistency",
]
