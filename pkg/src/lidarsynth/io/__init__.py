"""File formats: binary containers, PLY/XYZ point clouds, OBJ meshes."""

from .container import (read_latent, read_layout, read_range_image, read_tsdf,
                        write_latent, write_layout, write_range_image, write_tsdf)
from .obj import read_obj, write_obj
from .ply import ply_bytes, read_ply, read_xyz, write_ply, write_xyz

__all__ = [
    "read_latent", "read_layout", "read_range_image", "read_tsdf",
    "write_latent", "write_layout", "write_range_image", "write_tsdf",
    "read_obj", "write_obj", "ply_bytes", "read_ply", "read_xyz",
    "write_ply", "write_xyz",
]
