"""Raycast kernel backend selection.

The compiled Cython core is preferred when the extension was built; otherwise
the pure numpy fallback is used. Set LIDARSYNTH_KERNELS=python to force the
fallback (e.g. for benchmarking or debugging). Both backends are numerically
identical.
"""

import os

from . import fallback

if os.environ.get("LIDARSYNTH_KERNELS", "").lower() in ("python", "fallback"):
    raycast_kernel = fallback.raycast_kernel
    BACKEND = "python"
else:
    try:
        from ._core import raycast_kernel
        BACKEND = "compiled"
    except ImportError:
        raycast_kernel = fallback.raycast_kernel
        BACKEND = "python"

__all__ = ["raycast_kernel", "BACKEND", "fallback"]
