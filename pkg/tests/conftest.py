import numpy as np
import pytest

from lidarsynth.geometry import Pose, plane_mesh
from lidarsynth.sensor import LidarConfig, simulate_scan
from lidarsynth.testdata import street_mesh
from lidarsynth.world import WorldScene, TimeStep, compose


@pytest.fixture(scope="session")
def street_scene():
    return WorldScene.from_mesh(street_mesh(), [])


@pytest.fixture(scope="session")
def street_composed(street_scene):
    return compose(street_scene, TimeStep(Pose.identity()))


@pytest.fixture(scope="session")
def street_scan_cloud(street_composed):
    cfg = LidarConfig.uniform(24, np.deg2rad(-2.0), np.deg2rad(-24.0), 360,
                              max_range=80.0, min_range=0.5)
    ego = Pose(np.eye(3), (0.0, 0.0, 1.8))
    _, cloud = simulate_scan(street_composed, cfg, ego)
    return cloud


@pytest.fixture(scope="session")
def flat_scene():
    return WorldScene.from_mesh(plane_mesh(60.0, 0.0, cells=4), [])


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def random_pose(rng, max_translation=5.0):
    return Pose(random_rotation(rng), rng.uniform(-max_translation, max_translation, 3))
