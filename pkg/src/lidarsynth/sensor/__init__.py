"""Physics-informed LiDAR scan simulation."""

from .cloud import PointCloud, ranges
from .config import LidarConfig
from .range_image import RangeImage, beam_directions, project_to_range_image, unproject
from .raydrop import AnalyticRaydrop, RaydropModel, apply_raydrop, gumbel_sigmoid_sample
from .scan import RayBundle, generate_rays, simulate_scan

__all__ = [
    "PointCloud", "ranges", "LidarConfig", "RangeImage", "beam_directions",
    "project_to_range_image", "unproject", "AnalyticRaydrop", "RaydropModel",
    "apply_raydrop", "gumbel_sigmoid_sample", "RayBundle", "generate_rays",
    "simulate_scan",
]
