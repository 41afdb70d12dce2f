"""Dynamic actors: rigid vehicles and articulated pedestrians.

Actor geometry lives in a canonical frame: footprint centered on the origin
in x/y, bottom resting on z = 0. The footprint is the actor's axis-aligned
(length, width, height) extent in that frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ..geometry.kinematics import Joint, KinematicChain
from ..geometry.mesh import TriMesh, box_mesh, concat_meshes, scale_mesh
from ..geometry.pose import Pose, rot_y

ACTOR_CLASSES = ("vehicle", "pedestrian", "custom")
FOOTPRINT_MATCH_TOL = 0.05       # relative AABB/footprint mismatch allowed
GAIT_PERIOD = 1.2                # seconds per stride cycle


@dataclass
class Actor:
    id: int
    actor_class: str
    geometry: Union[TriMesh, KinematicChain]
    footprint: np.ndarray        # (3,) length, width, height in meters

    def __post_init__(self):
        self.footprint = np.asarray(self.footprint, dtype=np.float64).reshape(3)
        if self.id < 1:
            raise ValueError("actor ids must be positive (0 is the static label)")
        if self.actor_class not in ACTOR_CLASSES:
            raise ValueError(f"unknown actor class {self.actor_class!r}")
        if np.any(self.footprint <= 0.0):
            raise ValueError("footprint extents must be positive")
        extents = self.rest_aabb()[1] - self.rest_aabb()[0]
        rel = np.abs(extents - self.footprint) / self.footprint
        if np.any(rel > FOOTPRINT_MATCH_TOL):
            raise ValueError("geometry AABB deviates from footprint by more than 5%")

    def rest_aabb(self):
        mesh = self.geometry.rest_mesh() if isinstance(self.geometry, KinematicChain) \
            else self.geometry
        return mesh.aabb()

    def is_articulated(self) -> bool:
        return isinstance(self.geometry, KinematicChain)


def canonicalize_mesh(mesh: TriMesh) -> TriMesh:
    """Shift so the AABB is centered in x/y with its bottom at z = 0."""
    lo, hi = mesh.aabb()
    shift = np.array([-(lo[0] + hi[0]) / 2.0, -(lo[1] + hi[1]) / 2.0, -lo[2]])
    return TriMesh(mesh.vertices + shift, mesh.triangles, mesh.labels)


def rescale_actor(actor: Actor, target_footprint) -> Actor:
    """Anisotropically scale a rigid actor so its AABB matches the target."""
    target = np.asarray(target_footprint, dtype=np.float64).reshape(3)
    if np.any(target <= 0.0):
        raise ValueError("target footprint extents must be positive")
    if actor.is_articulated():
        raise ValueError("rescale supports rigid (mesh) actors only")
    lo, hi = actor.geometry.aabb()
    extents = hi - lo
    if np.any(extents <= 0.0):
        raise ValueError("source geometry AABB is degenerate")
    scaled = scale_mesh(actor.geometry, target / extents)
    return Actor(actor.id, actor.actor_class, canonicalize_mesh(scaled), target)


def vehicle_mesh(length: float = 4.5, width: float = 2.0, height: float = 1.6) -> TriMesh:
    """Two-box car: full-footprint body plus a shorter cabin on top."""
    body_h = height * 0.6
    body = box_mesh((length / 2, width / 2, body_h / 2), (0.0, 0.0, body_h / 2))
    cabin = box_mesh((length * 0.28, width * 0.42, (height - body_h) / 2),
                     (-length * 0.05, 0.0, body_h + (height - body_h) / 2))
    return canonicalize_mesh(concat_meshes([body, cabin]))


def pedestrian_chain(height: float = 1.75, width: float = 0.5,
                     depth: float = 0.35) -> KinematicChain:
    """Boxy biped: pelvis root with a torso and two thigh+shin leg chains.

    Segments are expressed in joint-local coordinates; at rest the feet touch
    z = 0 and the head tops out at `height`.
    """
    leg = 0.5 * height
    thigh, shin = 0.55 * leg, 0.45 * leg
    torso = height - leg
    hip_half = 0.22 * width
    limb_r = 0.07 * width + 0.02

    def limb(length):
        return box_mesh((limb_r, limb_r, length / 2), (0.0, 0.0, -length / 2))

    pelvis_seg = box_mesh((depth / 2, width / 2, 0.06), (0.0, 0.0, 0.0))
    torso_seg = box_mesh((depth / 2, width / 2 * 0.9, torso / 2), (0.0, 0.0, torso / 2))

    joints = [
        Joint("pelvis", -1, Pose(np.eye(3), (0.0, 0.0, leg)), pelvis_seg),
        Joint("torso", 0, Pose(), torso_seg),
        Joint("hip_l", 0, Pose(np.eye(3), (0.0, hip_half, 0.0)), limb(thigh)),
        Joint("knee_l", 2, Pose(np.eye(3), (0.0, 0.0, -thigh)), limb(shin)),
        Joint("hip_r", 0, Pose(np.eye(3), (0.0, -hip_half, 0.0)), limb(thigh)),
        Joint("knee_r", 4, Pose(np.eye(3), (0.0, 0.0, -thigh)), limb(shin)),
    ]
    return KinematicChain(joints)


def walk_config(chain: KinematicChain, time: float,
                period: float = GAIT_PERIOD) -> list:
    """Joint rotations for a sinusoidal stride at the given time.

    Hips counter-swing about the lateral axis; knees flex on the back swing.
    All other joints stay at rest.
    """
    phase = 2.0 * np.pi * (time / period)
    hip_amp = np.deg2rad(25.0)
    knee_amp = np.deg2rad(35.0)
    swing = np.sin(phase)
    config = [np.eye(3)] * len(chain)
    by_name = {j.name: i for i, j in enumerate(chain.joints)}
    config[by_name["hip_l"]] = rot_y(hip_amp * swing)
    config[by_name["hip_r"]] = rot_y(-hip_amp * swing)
    config[by_name["knee_l"]] = rot_y(knee_amp * max(0.0, -swing))
    config[by_name["knee_r"]] = rot_y(knee_amp * max(0.0, swing))
    return config


def make_vehicle(actor_id: int, length: float = 4.5, width: float = 2.0,
                 height: float = 1.6) -> Actor:
    return Actor(actor_id, "vehicle", vehicle_mesh(length, width, height),
                 (length, width, height))


def make_pedestrian(actor_id: int, height: float = 1.75) -> Actor:
    chain = pedestrian_chain(height)
    lo, hi = chain.rest_mesh().aabb()
    return Actor(actor_id, "pedestrian", chain, hi - lo)
