"""Rigid-segment kinematic chains and forward kinematics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from .mesh import TriMesh, concat_meshes, transform_mesh
from .pose import Pose


@dataclass
class Joint:
    name: str
    parent: int                 # index of parent joint; -1 for the root
    rest_pose: Pose             # pose relative to the parent joint
    segment: TriMesh            # rigid geometry attached to this joint


class KinematicChain:
    """Topologically sorted joint tree (parent index always < joint index)."""

    def __init__(self, joints: List[Joint]):
        if not joints:
            raise ValueError("chain needs at least one joint")
        if joints[0].parent != -1:
            raise ValueError("joint 0 must be the root (parent -1)")
        for i, j in enumerate(joints[1:], start=1):
            if not (0 <= j.parent < i):
                raise ValueError(f"joint {i} must have parent index < {i}")
        self.joints = list(joints)

    def __len__(self) -> int:
        return len(self.joints)

    def rest_mesh(self) -> TriMesh:
        return forward_kinematics(self, [np.eye(3)] * len(self.joints), Pose.identity())


def forward_kinematics(chain: KinematicChain, config, root_pose: Pose) -> TriMesh:
    """Pose every segment by its accumulated parent-chain transform.

    `config` holds one local 3x3 rotation per joint, applied after the joint's
    rest pose. The result is the union of the transformed segment meshes.
    """
    if len(config) != len(chain):
        raise ValueError(f"config length {len(config)} != joint count {len(chain)}")
    globals_: List[Pose] = []
    for i, joint in enumerate(chain.joints):
        local = joint.rest_pose @ Pose(np.asarray(config[i], dtype=float))
        if joint.parent < 0:
            globals_.append(root_pose @ local)
        else:
            globals_.append(globals_[joint.parent] @ local)
    parts = [transform_mesh(j.segment, g) for j, g in zip(chain.joints, globals_)]
    return concat_meshes(parts)
