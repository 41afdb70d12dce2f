"""World scenes, ground queries, collision checks, and the per-timestep
composition of static geometry with posed actors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..geometry.bvh import Bvh, build_bvh, raycast
from ..geometry.kinematics import forward_kinematics
from ..geometry.mesh import TriMesh, concat_meshes, transform_mesh
from ..geometry.pose import Pose
from .actors import Actor, walk_config

GROUND_RAY_HEIGHT = 100.0
COLLISION_MARGIN = 0.1
GROUND_CLEARANCE = 0.3
STATIC_LABEL = 0


@dataclass
class WorldScene:
    static_mesh: TriMesh
    static_bvh: Bvh
    actors: List[Actor]

    def __post_init__(self):
        if self.static_bvh.mesh is not self.static_mesh:
            raise ValueError("static BVH must reference the static mesh")
        ids = [a.id for a in self.actors]
        if len(set(ids)) != len(ids):
            raise ValueError("actor ids must be unique")

    @staticmethod
    def from_mesh(mesh: TriMesh, actors: Optional[List[Actor]] = None) -> "WorldScene":
        return WorldScene(mesh, build_bvh(mesh), actors or [])

    def actor_by_id(self, actor_id: int) -> Actor:
        for a in self.actors:
            if a.id == actor_id:
                return a
        raise KeyError(f"no actor with id {actor_id}")


def ground_height(scene: WorldScene, x: float, y: float,
                  start_height: float = GROUND_RAY_HEIGHT) -> Optional[float]:
    """Height of the topmost surface under (x, y), or None off the mesh."""
    hit = raycast(scene.static_bvh, np.array([x, y, start_height]),
                  np.array([0.0, 0.0, -1.0]), 2.0 * start_height)
    return None if hit is None else float(hit.point[2])


@dataclass
class CollisionReport:
    static_hit: bool
    actor_hit: bool
    off_mesh: bool

    def clean(self) -> bool:
        return not (self.static_hit or self.actor_hit or self.off_mesh)


def _triangles_vs_box(verts: np.ndarray, half: np.ndarray) -> bool:
    """SAT overlap of triangles (M, 3, 3) against an origin-centered AABB."""
    lo = verts.min(axis=1)
    hi = verts.max(axis=1)
    cand = np.all(lo <= half, axis=1) & np.all(hi >= -half, axis=1)
    if not cand.any():
        return False
    v = verts[cand]

    e = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 1], v[:, 0] - v[:, 2]], axis=1)
    n = np.cross(e[:, 0], e[:, 1])
    s = np.einsum("ij,ij->i", n, v[:, 0])
    r = np.abs(n) @ half
    alive = np.abs(s) <= r
    if not alive.any():
        return False
    v = v[alive]
    e = e[alive]

    # 9 cross axes: edge x unit axis. For axis u_k the cross product just
    # permutes the edge components, so build each axis explicitly.
    for ei in range(3):
        for k in range(3):
            edge = e[:, ei]
            a = np.zeros_like(edge)
            a[:, (k + 1) % 3] = edge[:, (k + 2) % 3]
            a[:, (k + 2) % 3] = -edge[:, (k + 1) % 3]
            p = np.einsum("ij,ikj->ik", a, v)
            rad = np.abs(a) @ half
            sep = (p.min(axis=1) > rad) | (p.max(axis=1) < -rad)
            if sep.any():
                v = v[~sep]
                e = e[~sep]
                if len(v) == 0:
                    return False
    return True


def oriented_box_world_aabb(center: np.ndarray, rotation: np.ndarray,
                            half: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    reach = np.abs(rotation) @ half
    return center - reach, center + reach


def actor_world_aabb(actor: Actor, pose: Pose) -> Tuple[np.ndarray, np.ndarray]:
    """World AABB of the actor's posed footprint box."""
    lo, hi = actor.rest_aabb()
    center_local = (lo + hi) / 2.0
    half = (hi - lo) / 2.0
    center = pose.apply(center_local)
    return oriented_box_world_aabb(center, pose.rotation, half)


def check_collision(scene: WorldScene, actor_geometry, pose: Pose,
                    others: Sequence[Tuple[np.ndarray, np.ndarray]] = (),
                    margin: float = COLLISION_MARGIN,
                    ground_clearance: float = GROUND_CLEARANCE) -> CollisionReport:
    """Flags for one posed actor.

    static_hit: the actor's oriented footprint box, inflated by `margin` and
    with its bottom raised by `ground_clearance` (so resting on the road does
    not count), overlaps static triangles. actor_hit: plain world-AABB overlap
    against `others`. off_mesh: no ground under the footprint center.
    """
    if hasattr(actor_geometry, "rest_mesh"):
        lo, hi = actor_geometry.rest_mesh().aabb()
    else:
        lo, hi = actor_geometry.aabb()

    box_lo = np.array([lo[0] - margin, lo[1] - margin, lo[2] + ground_clearance])
    box_hi = np.array([hi[0] + margin, hi[1] + margin, hi[2] + margin])
    static_hit = False
    if np.all(box_hi > box_lo):
        center_local = (box_lo + box_hi) / 2.0
        half = (box_hi - box_lo) / 2.0
        center = pose.apply(center_local)
        qlo, qhi = oriented_box_world_aabb(center, pose.rotation, half)
        cand = scene.static_bvh.aabb_query(qlo, qhi)
        if len(cand):
            tri = scene.static_mesh.vertices[scene.static_mesh.triangles[cand]]
            local = (tri - center) @ pose.rotation   # world -> box frame
            static_hit = _triangles_vs_box(local, half)

    actor_hit = False
    if others:
        my_lo, my_hi = oriented_box_world_aabb(
            pose.apply((lo + hi) / 2.0), pose.rotation, (hi - lo) / 2.0)
        for olo, ohi in others:
            if np.all(my_lo <= ohi) and np.all(my_hi >= olo):
                actor_hit = True
                break

    center_xy = pose.translation
    off_mesh = ground_height(scene, center_xy[0], center_xy[1]) is None
    return CollisionReport(static_hit, actor_hit, off_mesh)


@dataclass
class ComposedScene:
    """One timestep's merged world geometry with per-triangle actor labels."""

    mesh: TriMesh
    bvh: Bvh

    @property
    def labels(self) -> np.ndarray:
        return self.mesh.labels


def compose(scene: WorldScene, step) -> ComposedScene:
    """Place every actor at its pose for the timestep `step` (a TimeStep).

    Rigid actors are transformed; pedestrians are articulated first. The
    static mesh keeps label 0; actor triangles carry the actor id.
    """
    for actor in scene.actors:
        if actor.id not in step.actors:
            raise ValueError(f"timestep lacks a pose for actor {actor.id}")

    parts = [scene.static_mesh]
    labels = [STATIC_LABEL]
    for actor in scene.actors:
        state = step.actors[actor.id]
        if actor.is_articulated():
            config = state.joints
            if config is None:
                config = walk_config(actor.geometry, 0.0)
            posed = forward_kinematics(actor.geometry, config, state.pose)
        else:
            posed = transform_mesh(actor.geometry, state.pose)
        parts.append(posed)
        labels.append(actor.id)
    merged = concat_meshes(parts, labels=labels)
    return ComposedScene(merged, build_bvh(merged))
