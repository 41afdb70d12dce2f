"""Semantic layouts, actors, trajectory sampling, and scene composition."""

from .actors import (Actor, canonicalize_mesh, make_pedestrian, make_vehicle,
                     pedestrian_chain, rescale_actor, vehicle_mesh, walk_config)
from .layout import DEFAULT_CLASSES, SemanticLayout, VectorMap, rasterize_map
from .scene import (CollisionReport, ComposedScene, WorldScene, actor_world_aabb,
                    check_collision, compose, ground_height)
from .trajectory import (ActorState, SampleResult, TimeStep, Trajectory,
                         TrajectoryBank, TrajectoryExhausted, TrajectoryTemplate,
                         sample_trajectories, verify_trajectory)

__all__ = [
    "Actor", "canonicalize_mesh", "make_pedestrian", "make_vehicle",
    "pedestrian_chain", "rescale_actor", "vehicle_mesh", "walk_config",
    "DEFAULT_CLASSES", "SemanticLayout", "VectorMap", "rasterize_map",
    "CollisionReport", "ComposedScene", "WorldScene", "actor_world_aabb",
    "check_collision", "compose", "ground_height", "ActorState", "SampleResult",
    "TimeStep", "Trajectory", "TrajectoryBank", "TrajectoryExhausted",
    "TrajectoryTemplate", "sample_trajectories", "verify_trajectory",
]
