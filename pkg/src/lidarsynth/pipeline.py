"""End-to-end scan video generation.

Stages, in order: obtain the static volume (load or diffusion-sample),
extract its mesh, load and rescale actors, sample trajectories, then per
frame compose the world, simulate the scan, and apply raydrop. Every output
is a deterministic function of the resolved config and seed; per-frame RNG
substreams keep results identical across thread counts.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .diffusion.models import GaussianScoreModel, IdentityCodec
from .diffusion.sampling import sample_euler, sample_langevin
from .diffusion.schedule import DEFAULT_STEPS_PER_LEVEL, NoiseSchedule
from .geometry.marching import extract_mesh
from .geometry.mesh import TriMesh
from .geometry.pose import Pose, rot_z
from .io.container import read_layout, read_tsdf, write_range_image
from .io.obj import read_obj
from .io.ply import write_ply
from .sensor.config import LidarConfig
from .sensor.raydrop import AnalyticRaydrop, apply_raydrop
from .sensor.scan import simulate_scan
from .world.actors import Actor, canonicalize_mesh, make_pedestrian, make_vehicle, rescale_actor
from .world.scene import WorldScene, compose
from .world.trajectory import TrajectoryBank, sample_trajectories


class PipelineError(RuntimeError):
    def __init__(self, stage: str, message: str, frame: Optional[int] = None):
        where = stage if frame is None else f"{stage} (frame {frame})"
        super().__init__(f"{where}: {message}")
        self.stage = stage
        self.frame = frame


@dataclass
class PipelineConfig:
    """Resolved run description; see README for the JSON schema."""

    frames: int
    dt: float
    seed: int
    scene: dict                    # {"tsdf": path} | {"obj": path} | {"sample": {...}}
    lidar: LidarConfig
    bank: Optional[str] = None
    layout: Optional[str] = None
    actors: List[dict] = field(default_factory=list)
    n_actors: Optional[int] = None
    raydrop: dict = field(default_factory=lambda: {"mode": "none"})
    trajectory: dict = field(default_factory=dict)
    accumulate: bool = False
    iso: float = 0.0

    def __post_init__(self):
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.n_actors is None:
            self.n_actors = len(self.actors)

    @staticmethod
    def from_dict(d: dict, base_dir: str = ".") -> "PipelineConfig":
        base = Path(base_dir)

        def resolve(p):
            return None if p is None else str((base / p).resolve())

        lidar_spec = d.get("lidar")
        if isinstance(lidar_spec, str):
            lidar = LidarConfig.load(resolve(lidar_spec))
        elif isinstance(lidar_spec, dict):
            lidar = LidarConfig.from_dict(lidar_spec)
        else:
            raise ValueError("config needs a lidar section (path or object)")

        scene = dict(d.get("scene") or {})
        for key in ("tsdf", "obj"):
            if key in scene:
                scene[key] = resolve(scene[key])
                if not os.path.exists(scene[key]):
                    raise ValueError(f"scene {key} file not found: {scene[key]}")
        if "sample" in scene:
            scene["sample"] = dict(scene["sample"])
            scene["sample"]["model"] = resolve(scene["sample"]["model"])
            if not os.path.exists(scene["sample"]["model"]):
                raise ValueError("score model file not found")
        if not scene:
            raise ValueError("config needs a scene section")

        actors = [dict(a) for a in d.get("actors", [])]
        for a in actors:
            if "asset" in a:
                a["asset"] = resolve(a["asset"])
                if not os.path.exists(a["asset"]):
                    raise ValueError(f"actor asset not found: {a['asset']}")

        bank = resolve(d.get("bank"))
        if bank is not None and not os.path.exists(bank):
            raise ValueError(f"trajectory bank not found: {bank}")
        layout = resolve(d.get("layout"))
        if layout is not None and not os.path.exists(layout):
            raise ValueError(f"layout not found: {layout}")

        return PipelineConfig(
            frames=int(d.get("frames", 1)),
            dt=float(d.get("dt", 0.1)),
            seed=int(d.get("seed", 0)),
            scene=scene,
            lidar=lidar,
            bank=bank,
            layout=layout,
            actors=actors,
            n_actors=d.get("n_actors"),
            raydrop=dict(d.get("raydrop", {"mode": "none"})),
            trajectory=dict(d.get("trajectory", {})),
            accumulate=bool(d.get("accumulate", False)),
            iso=float(d.get("iso", 0.0)))

    def to_dict(self) -> dict:
        return {
            "frames": self.frames, "dt": self.dt, "seed": self.seed,
            "scene": self.scene, "lidar": self.lidar.to_dict(),
            "bank": self.bank, "layout": self.layout, "actors": self.actors,
            "n_actors": self.n_actors, "raydrop": self.raydrop,
            "trajectory": self.trajectory, "accumulate": self.accumulate,
            "iso": self.iso,
        }


def load_config(path) -> PipelineConfig:
    with open(path) as f:
        d = json.load(f)
    if "config" in d and isinstance(d["config"], dict):
        d = d["config"]         # accept a manifest as a config
    return PipelineConfig.from_dict(d, base_dir=os.path.dirname(os.path.abspath(path)))


def _sample_volume(spec: dict, seed: int):
    model = GaussianScoreModel.load(spec["model"])
    dims = tuple(int(x) for x in spec["dims"])
    codec = IdentityCodec(dims, float(spec["voxel_size"]),
                          np.asarray(spec.get("origin", (0, 0, 0)), dtype=float))
    sched = NoiseSchedule.geometric(
        K=int(spec.get("levels", 100)),
        sigma_max=float(spec.get("sigma_max", 10.0)),
        sigma_min=float(spec.get("sigma_min", 0.01)),
        eta=float(spec.get("eta", 0.1)))
    rng = np.random.default_rng([seed, 2])
    shape = (int(np.prod(dims)),)
    cond = spec.get("cond")
    w = float(spec.get("w", 0.0))
    sampler = spec.get("sampler", "euler")
    if sampler == "langevin":
        z = sample_langevin(model, sched, cond, w,
                            int(spec.get("steps_per_level", DEFAULT_STEPS_PER_LEVEL)),
                            rng, shape=shape)
    elif sampler == "euler":
        z = sample_euler(model, sched, cond, w, rng, shape=shape)
    else:
        raise ValueError(f"unknown sampler {sampler!r}")
    return codec.decode(z)


def _build_static_mesh(cfg: PipelineConfig) -> TriMesh:
    if "obj" in cfg.scene:
        return read_obj(cfg.scene["obj"])
    if "tsdf" in cfg.scene:
        vol = read_tsdf(cfg.scene["tsdf"])
    else:
        vol = _sample_volume(cfg.scene["sample"], cfg.seed)
    mesh = extract_mesh(vol, cfg.iso)
    if mesh.is_empty():
        raise PipelineError("scene", "extracted mesh is empty")
    return mesh


def _build_actor(spec: dict, index: int) -> Actor:
    actor_id = int(spec.get("id", index + 1))
    cls = spec.get("class", "vehicle")
    footprint = spec.get("footprint")
    if "asset" in spec:
        mesh = canonicalize_mesh(read_obj(spec["asset"]))
        actor = Actor(actor_id, cls if cls in ("vehicle", "custom") else "custom",
                      mesh, mesh.aabb()[1] - mesh.aabb()[0])
        if footprint is not None:
            actor = rescale_actor(actor, footprint)
        return actor
    if cls == "pedestrian":
        height = footprint[2] if footprint else 1.75
        return make_pedestrian(actor_id, height)
    l, w, h = footprint if footprint else (4.5, 2.0, 1.6)
    return make_vehicle(actor_id, l, w, h)


@dataclass
class PipelineResult:
    manifest: dict
    out_dir: str


def run_pipeline(cfg: PipelineConfig, out_dir, threads: int = 1) -> PipelineResult:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    partial_marker = out / ".partial"
    partial_marker.write_text("run in progress\n")
    try:
        result = _run(cfg, out, threads)
    except PipelineError:
        raise
    except Exception as err:
        raise PipelineError("pipeline", str(err)) from err
    partial_marker.unlink()
    return result


def _run(cfg: PipelineConfig, out: Path, threads: int) -> PipelineResult:
    try:
        static_mesh = _build_static_mesh(cfg)
    except PipelineError:
        raise
    except Exception as err:
        raise PipelineError("scene", str(err)) from err

    try:
        actors = [_build_actor(spec, i) for i, spec in enumerate(cfg.actors)]
        scene = WorldScene.from_mesh(static_mesh, actors)
    except Exception as err:
        raise PipelineError("actors", str(err)) from err

    acceptance_ratio = None
    try:
        if cfg.n_actors or cfg.bank:
            if cfg.bank is None:
                raise ValueError("actors requested but no trajectory bank given")
            bank = TrajectoryBank.load(cfg.bank)
            layout = read_layout(cfg.layout) if cfg.layout else None
            tr = cfg.trajectory
            sample = sample_trajectories(
                bank, scene, layout, cfg.n_actors, cfg.seed,
                max_attempts=int(tr.get("max_attempts", 1000)),
                n_steps=cfg.frames, dt=cfg.dt,
                axle_offset=float(tr.get("axle_offset", 0.0)),
                v_max=float(tr.get("v_max", 40.0)))
            traj = sample.trajectory
            acceptance_ratio = sample.acceptance_ratio
        else:
            from .world.trajectory import TimeStep, Trajectory
            steps = [TimeStep(Pose(rot_z(0.0), (0.0, 0.0, 0.0)), {})
                     for _ in range(cfg.frames)]
            traj = Trajectory(cfg.dt, steps)
    except PipelineError:
        raise
    except Exception as err:
        raise PipelineError("trajectories", str(err)) from err

    static_composed = compose(scene, traj.steps[0]) if not scene.actors else None

    def render(i: int):
        step = traj.steps[i]
        composed = static_composed if static_composed is not None \
            else compose(scene, step)
        img, cloud = simulate_scan(composed, cfg.lidar, step.ego)
        mode = cfg.raydrop.get("mode", "none")
        if mode != "none":
            model = AnalyticRaydrop(
                a=float(cfg.raydrop.get("a", 4.0)),
                b=float(cfg.raydrop.get("b", 0.05)),
                c=float(cfg.raydrop.get("c", 2.0)))
            rng = np.random.default_rng([cfg.seed, 1, i])
            img, cloud = apply_raydrop(img, cloud, model, mode,
                                       float(cfg.raydrop.get("temperature", 1.0)),
                                       rng)
        return img, cloud

    frames_meta = []
    world_points = []
    try:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                rendered = list(pool.map(render, range(cfg.frames)))
        else:
            rendered = [render(i) for i in range(cfg.frames)]
    except Exception as err:
        raise PipelineError("simulate", str(err)) from err

    for i, (img, cloud) in enumerate(rendered):
        try:
            ply_name = f"frame_{i:04d}.ply"
            rimg_name = f"frame_{i:04d}.rimg"
            write_ply(out / ply_name, cloud)
            write_range_image(out / rimg_name, img)
            step = traj.steps[i]
            frames_meta.append({
                "index": i,
                "time": i * cfg.dt,
                "ply": ply_name,
                "range_image": rimg_name,
                "ego": step.ego.to_dict(),
                "actors": {str(a): st.pose.to_dict() for a, st in step.actors.items()},
                "n_points": len(cloud),
            })
            if cfg.accumulate:
                world_points.append(step.ego.apply(cloud.points))
        except Exception as err:
            raise PipelineError("write", str(err), frame=i) from err

    outputs = [m["ply"] for m in frames_meta] + [m["range_image"] for m in frames_meta]
    poses = [{"index": m["index"], "time": m["time"], "ego": m["ego"],
              "actors": m["actors"]} for m in frames_meta]
    with open(out / "poses.json", "w") as f:
        json.dump(poses, f, indent=2, sort_keys=True)
    outputs.append("poses.json")
    if cfg.accumulate:
        from .sensor.cloud import PointCloud
        acc = PointCloud(np.concatenate(world_points) if world_points
                         else np.zeros((0, 3)), frame="world")
        write_ply(out / "accumulated.ply", acc)
        outputs.append("accumulated.ply")

    manifest = {
        "tool": "lidarsynth",
        "version": __version__,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "frames": frames_meta,
        "outputs": sorted(outputs),
    }
    if acceptance_ratio is not None:
        manifest["trajectory_acceptance_ratio"] = acceptance_ratio
    with open(out / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
    return PipelineResult(manifest, str(out))
