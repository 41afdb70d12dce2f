"""Trajectories, trajectory banks, and physics-rejective sampling.

Bank templates are canonical: origin-centered with initial heading along +x,
so anchoring a template into the scene is a single planar rigid transform.
Sampling draws templates uniformly, anchors them on drivable layout cells,
snaps every pose to the ground, and keeps only candidates whose every
timestep is collision-free.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ..geometry.pose import Pose, rot_z
from .actors import Actor, walk_config
from .layout import SemanticLayout
from .scene import CollisionReport, WorldScene, actor_world_aabb, check_collision, ground_height

DEFAULT_V_MAX = 40.0            # m/s cap on ego motion between steps
HEADING_JITTER = np.deg2rad(15.0)
EGO_FOOTPRINT = (4.5, 2.0, 1.6)


class TrajectoryExhausted(RuntimeError):
    """Raised when too few candidates survive rejection."""

    def __init__(self, accepted: int, needed: int, attempts: int):
        super().__init__(
            f"accepted only {accepted}/{needed} tracks after {attempts} attempts")
        self.accepted = accepted
        self.needed = needed
        self.attempts = attempts


@dataclass
class ActorState:
    pose: Pose
    joints: Optional[list] = None      # per-joint rotations for pedestrians


@dataclass
class TimeStep:
    ego: Pose
    actors: Dict[int, ActorState] = field(default_factory=dict)


@dataclass
class Trajectory:
    dt: float
    steps: List[TimeStep]
    v_max: float = DEFAULT_V_MAX

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("timestep duration must be positive")
        if not self.steps:
            raise ValueError("trajectory needs at least one timestep")
        ids = set(self.steps[0].actors)
        for i, s in enumerate(self.steps[1:], start=1):
            if set(s.actors) != ids:
                raise ValueError(f"timestep {i} lists different actor ids")
        for a, b in zip(self.steps[:-1], self.steps[1:]):
            move = np.linalg.norm(b.ego.translation - a.ego.translation)
            if move > self.v_max * self.dt + 1e-9:
                raise ValueError(
                    f"ego moves {move:.3f} m in one step, over the "
                    f"{self.v_max * self.dt:.3f} m limit")

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    @property
    def actor_ids(self) -> List[int]:
        return sorted(self.steps[0].actors)


@dataclass
class TrajectoryTemplate:
    """Canonical pose track: rows of (t, x, y, heading)."""

    states: np.ndarray
    actor_class: str = "vehicle"
    name: str = ""

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.float64).reshape(-1, 4)
        if len(self.states) < 2:
            raise ValueError("templates need at least two states")
        if np.any(np.diff(self.states[:, 0]) <= 0):
            raise ValueError("template times must be strictly increasing")

    @property
    def duration(self) -> float:
        return float(self.states[-1, 0] - self.states[0, 0])

    def canonicalized(self) -> "TrajectoryTemplate":
        """Shift the start to the origin and rotate initial heading to +x."""
        s = self.states.copy()
        s[:, 0] -= s[0, 0]
        h0 = s[0, 3]
        c, sn = np.cos(-h0), np.sin(-h0)
        xy = s[:, 1:3] - s[0, 1:3]
        s[:, 1] = c * xy[:, 0] - sn * xy[:, 1]
        s[:, 2] = sn * xy[:, 0] + c * xy[:, 1]
        s[:, 3] -= h0
        return TrajectoryTemplate(s, self.actor_class, self.name)

    def resample(self, times: np.ndarray) -> np.ndarray:
        """(T, 3) of x, y, heading at the requested times (clamped ends)."""
        t = np.clip(times, self.states[0, 0], self.states[-1, 0])
        out = np.empty((len(t), 3))
        for j in range(3):
            out[:, j] = np.interp(t, self.states[:, 0], self.states[:, j + 1])
        return out


@dataclass
class TrajectoryBank:
    templates: List[TrajectoryTemplate]

    def __post_init__(self):
        self.templates = [t.canonicalized() for t in self.templates]

    def __len__(self) -> int:
        return len(self.templates)

    def to_dict(self) -> dict:
        return {"templates": [
            {"name": t.name, "class": t.actor_class, "states": t.states.tolist()}
            for t in self.templates]}

    @staticmethod
    def from_dict(d: dict) -> "TrajectoryBank":
        return TrajectoryBank([
            TrajectoryTemplate(np.asarray(e["states"], dtype=float),
                               e.get("class", "vehicle"), e.get("name", ""))
            for e in d["templates"]])

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)

    @staticmethod
    def load(path) -> "TrajectoryBank":
        with open(path) as f:
            return TrajectoryBank.from_dict(json.load(f))


@dataclass
class SampleResult:
    trajectory: "Trajectory"
    attempts: int
    accepted: int

    @property
    def acceptance_ratio(self) -> float:
        return self.accepted / self.attempts if self.attempts else 0.0


def _anchor_position(layout: Optional[SemanticLayout], scene: WorldScene,
                     rng: np.random.Generator) -> np.ndarray:
    if layout is not None:
        cells = layout.drivable_cells()
        if len(cells):
            i, j = cells[rng.integers(len(cells))]
            return layout.origin + layout.resolution * np.array([i, j], dtype=float)
    lo, hi = scene.static_mesh.aabb()
    return rng.uniform(lo[:2], hi[:2])


def _candidate_track(template: TrajectoryTemplate, anchor_xy: np.ndarray,
                     anchor_heading: float, times: np.ndarray,
                     scene: WorldScene, axle_offset: float):
    """World-frame poses for an anchored template, or None off the mesh."""
    local = template.resample(times)
    c, s = np.cos(anchor_heading), np.sin(anchor_heading)
    xs = anchor_xy[0] + c * local[:, 0] - s * local[:, 1]
    ys = anchor_xy[1] + s * local[:, 0] + c * local[:, 1]
    headings = local[:, 2] + anchor_heading
    poses = []
    for x, y, h in zip(xs, ys, headings):
        z = ground_height(scene, x, y)
        if z is None:
            return None
        poses.append(Pose(rot_z(h), (x, y, z + axle_offset)))
    return poses


def _track_clean(scene: WorldScene, geometry, poses,
                 others_per_step) -> bool:
    for i, pose in enumerate(poses):
        report = check_collision(scene, geometry, pose, others_per_step[i])
        if not report.clean():
            return False
    return True


def sample_trajectories(bank: TrajectoryBank, scene: WorldScene,
                        layout: Optional[SemanticLayout], n_actors: int,
                        rng_seed: int, max_attempts: int,
                        n_steps: int = 10, dt: float = 0.1,
                        axle_offset: float = 0.0,
                        v_max: float = DEFAULT_V_MAX) -> SampleResult:
    """Draw one ego track plus `n_actors` actor tracks by rejective sampling.

    Attempt i uses the RNG substream seeded by (rng_seed, i), so candidate
    draws do not depend on how earlier attempts were accepted or rejected.
    Raises TrajectoryExhausted when the attempt budget runs out first.
    """
    if len(bank) == 0:
        raise ValueError("trajectory bank is empty")
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    if n_actors > len(scene.actors):
        raise ValueError(f"scene holds {len(scene.actors)} actors, "
                         f"cannot sample {n_actors} tracks")
    seed_key = [int(s) for s in np.atleast_1d(rng_seed)]

    from ..geometry.mesh import box_mesh
    ego_geometry = box_mesh(np.asarray(EGO_FOOTPRINT) / 2.0,
                            (0, 0, EGO_FOOTPRINT[2] / 2.0))
    times = dt * np.arange(n_steps)
    targets = scene.actors[:n_actors]

    accepted_tracks = []        # (actor or None for ego, poses)
    others_per_step = [[] for _ in range(n_steps)]
    attempts = 0
    accepted = 0
    needed = n_actors + 1

    def template_pool(actor_class: str):
        matching = [t for t in bank.templates if t.actor_class == actor_class]
        return matching if matching else bank.templates

    while accepted < needed and attempts < max_attempts:
        rng = np.random.default_rng(seed_key + [attempts])
        attempts += 1

        is_ego = accepted == 0
        actor = None if is_ego else targets[accepted - 1]
        geometry = ego_geometry if is_ego else actor.geometry
        pool = template_pool("vehicle" if is_ego else actor.actor_class)
        template = pool[rng.integers(len(pool))]
        anchor_xy = _anchor_position(layout, scene, rng)
        anchor_heading = rng.uniform(-HEADING_JITTER, HEADING_JITTER)

        poses = _candidate_track(template, anchor_xy, anchor_heading, times,
                                 scene, axle_offset)
        if poses is None:
            continue
        if not _track_clean(scene, geometry, poses, others_per_step):
            continue

        accepted += 1
        accepted_tracks.append((actor, poses))
        footprint_actor = actor if actor is not None else Actor(
            10 ** 6, "vehicle", ego_geometry, EGO_FOOTPRINT)
        for i, pose in enumerate(poses):
            others_per_step[i].append(actor_world_aabb(footprint_actor, pose))

    if accepted < needed:
        raise TrajectoryExhausted(accepted, needed, attempts)

    steps = []
    for i in range(n_steps):
        ego_pose = accepted_tracks[0][1][i]
        actor_states = {}
        for actor, poses in accepted_tracks[1:]:
            joints = None
            if actor.is_articulated():
                joints = walk_config(actor.geometry, times[i])
            actor_states[actor.id] = ActorState(poses[i], joints)
        steps.append(TimeStep(ego_pose, actor_states))
    traj = Trajectory(dt, steps, v_max=v_max)
    return SampleResult(traj, attempts, accepted)


def verify_trajectory(scene: WorldScene, traj: Trajectory) -> List[CollisionReport]:
    """Re-run collision checks for every actor at every timestep."""
    reports = []
    for step in traj.steps:
        aabbs = {aid: actor_world_aabb(scene.actor_by_id(aid), st.pose)
                 for aid, st in step.actors.items()}
        for aid, st in step.actors.items():
            others = [box for other, box in aabbs.items() if other != aid]
            actor = scene.actor_by_id(aid)
            reports.append(check_collision(scene, actor.geometry, st.pose, others))
    return reports
