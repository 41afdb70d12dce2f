"""Core 3D primitives: SDF volumes, meshes, transforms, and ray queries."""

from .bvh import (Bvh, Hit, build_bvh, hit_normals, raycast, raycast_batch,
                  raycast_brute_force)
from .kinematics import Joint, KinematicChain, forward_kinematics
from .marching import extract_mesh
from .mesh import (TriMesh, box_mesh, concat_meshes, plane_mesh, scale_mesh,
                   transform_mesh)
from .pose import Pose, axis_angle, rot_x, rot_y, rot_z, rotation_angle
from .volume import (Box, Plane, Sphere, TsdfVolume, analytic_sdf, union_sdf,
                     DEFAULT_TRUNC_VOXELS)

__all__ = [
    "Bvh", "Hit", "build_bvh", "hit_normals", "raycast", "raycast_batch",
    "raycast_brute_force", "Joint", "KinematicChain", "forward_kinematics",
    "extract_mesh", "TriMesh", "box_mesh", "concat_meshes", "plane_mesh",
    "scale_mesh", "transform_mesh", "Pose", "axis_angle", "rot_x", "rot_y",
    "rot_z", "rotation_angle", "Box", "Plane", "Sphere", "TsdfVolume",
    "analytic_sdf", "union_sdf", "DEFAULT_TRUNC_VOXELS",
]
