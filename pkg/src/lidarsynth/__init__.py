"""lidarsynth: 4D world composition and physics-informed LiDAR scan synthesis."""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
