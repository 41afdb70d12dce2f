import json
from pathlib import Path

import numpy as np
import pytest

from lidarsynth.cli import main
from lidarsynth.io import read_layout, read_ply, read_tsdf
from lidarsynth.testdata import write_testdata


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("testdata")
    write_testdata(d)
    return d


def run(*argv):
    return main([str(a) for a in argv])


def out_bytes(d: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


class TestBasicCommands:
    def test_gen_testdata(self, tmp_path):
        assert run("--out-dir", tmp_path, "gen-testdata") == 0
        assert (tmp_path / "pipeline.json").exists()
        read_tsdf(tmp_path / "plane.tsdf")

    def test_mesh_subcommand(self, data_dir, tmp_path):
        assert run("--out-dir", tmp_path, "mesh", data_dir / "plane.tsdf",
                   "--out", "plane.obj") == 0
        text = (tmp_path / "plane.obj").read_text()
        assert text.startswith("v ")

    def test_rasterize_subcommand(self, data_dir, tmp_path):
        assert run("--out-dir", tmp_path, "rasterize", data_dir / "map.json",
                   "--dims", "40", "40", "--resolution", "1.0") == 0
        layout = read_layout(tmp_path / "layout.layo")
        assert layout.channels.any()

    def test_sample_subcommand(self, data_dir, tmp_path):
        assert run("--out-dir", tmp_path, "--seed", "3",
                   "--config", data_dir / "sample.json",
                   "sample", "--tsdf-out", "sampled.tsdf") == 0
        vol = read_tsdf(tmp_path / "sampled.tsdf")
        assert vol.values.shape == tuple(json.loads(
            (data_dir / "sample.json").read_text())["dims"])

    def test_missing_config_is_validation_error(self, tmp_path):
        assert run("--out-dir", tmp_path, "simulate") == 2

    def test_unknown_file_is_validation_error(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"frames": 1, "dt": 0.1,
                                   "scene": {"tsdf": "missing.tsdf"},
                                   "lidar": {"elevations": [0.0],
                                             "azimuth_count": 4}}))
        assert run("--config", cfg, "--out-dir", tmp_path / "o", "scan") == 2


class TestScan:
    def test_plane_scan_matches_formula(self, data_dir, tmp_path):
        assert run("--out-dir", tmp_path, "--config", data_dir / "scan.json",
                   "scan") == 0
        cloud = read_ply(tmp_path / "frame_0000.ply")
        lidar = json.loads((data_dir / "lidar.json").read_text())
        elev = np.asarray(lidar["elevations"])
        h = 1.8
        r = np.linalg.norm(cloud.points - np.array([0.0, 0.0, h]), axis=1)
        expected = h / np.sin(-elev[cloud.beam])
        assert np.abs(r - expected).max() < 1e-6


class TestSimulateDeterminism:
    def test_same_seed_same_bytes(self, data_dir, tmp_path):
        a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
        assert run("--out-dir", a, "--seed", "7",
                   "--config", data_dir / "pipeline.json", "simulate") == 0
        assert run("--out-dir", b, "--seed", "7",
                   "--config", data_dir / "pipeline.json", "simulate") == 0
        assert run("--out-dir", c, "--seed", "7", "--threads", "4",
                   "--config", data_dir / "pipeline.json", "simulate") == 0
        assert out_bytes(a) == out_bytes(b)
        assert out_bytes(a) == out_bytes(c)

    def test_different_seed_differs(self, data_dir, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run("--out-dir", a, "--seed", "7",
                   "--config", data_dir / "pipeline.json", "simulate") == 0
        assert run("--out-dir", b, "--seed", "8",
                   "--config", data_dir / "pipeline.json", "simulate") == 0
        assert out_bytes(a) != out_bytes(b)

    def test_rerun_from_manifest_reproduces(self, data_dir, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run("--out-dir", a, "--seed", "7",
                   "--config", data_dir / "pipeline.json", "simulate") == 0
        assert run("--out-dir", b, "--config", a / "manifest.json",
                   "simulate") == 0
        assert out_bytes(a) == out_bytes(b)

    def test_partial_marker_on_failure(self, data_dir, tmp_path):
        cfg = json.loads((data_dir / "pipeline.json").read_text())
        cfg["trajectory"]["max_attempts"] = 1
        cfg["n_actors"] = 1
        cfg["scene"] = {"tsdf": str(data_dir / "street.tsdf")}
        cfg["lidar"] = str(data_dir / "lidar.json")
        cfg["bank"] = str(data_dir / "bank.json")
        cfg["layout"] = str(data_dir / "layout.layo")
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(cfg))
        out = tmp_path / "out"
        assert run("--out-dir", out, "--config", bad, "simulate") == 1
        assert (out / ".partial").exists()


class TestEval:
    def test_jsd_identical_zero(self, data_dir, tmp_path, capsys):
        out = tmp_path / "frames"
        assert run("--out-dir", out, "--seed", "7",
                   "--config", data_dir / "pipeline.json", "simulate") == 0
        ply = next(out.glob("*.ply"))
        assert run("eval", "jsd", ply, ply) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["value"] == 0.0
        assert report["metric"] == "jsd"

    def test_chamfer_and_mmd_and_consistency(self, data_dir, tmp_path, capsys):
        out = tmp_path / "frames"
        assert run("--out-dir", out, "--seed", "9",
                   "--config", data_dir / "pipeline.json", "simulate") == 0
        plys = sorted(out.glob("*.ply"))
        assert run("eval", "chamfer", plys[0], plys[0]) == 0
        assert json.loads(capsys.readouterr().out)["value"] == 0.0
        assert run("eval", "mmd", out, out) == 0
        assert json.loads(capsys.readouterr().out)["value"] <= 1e-12
        assert run("eval", "consistency", *plys, "--tau", "0.5") == 0
        report = json.loads(capsys.readouterr().out)
        assert report["value"]["n_pairs"] == len(plys) - 1

    def test_wrong_arity_is_validation_error(self, data_dir, tmp_path):
        assert run("eval", "chamfer", "only_one.ply") == 2

    def test_dump_histograms(self, data_dir, tmp_path, capsys):
        out = tmp_path / "frames"
        assert run("--out-dir", out, "--seed", "5",
                   "--config", data_dir / "pipeline.json", "simulate") == 0
        ply = next(out.glob("*.ply"))
        assert run("--out-dir", tmp_path, "eval", "jsd", ply, ply,
                   "--dump-histograms") == 0
        capsys.readouterr()
        layout = read_layout(tmp_path / "hist_a.layo")
        assert layout.channels.shape[0] == 1
        assert layout.channels.any()


class TestPedestrianPipeline:
    def test_articulated_actor_renders(self, data_dir, tmp_path):
        cfg = json.loads((data_dir / "pipeline.json").read_text())
        cfg["scene"] = {"tsdf": str(data_dir / "plane.tsdf")}
        cfg["lidar"] = str(data_dir / "lidar.json")
        cfg["bank"] = str(data_dir / "bank.json")
        cfg["layout"] = str(data_dir / "layout.layo")
        cfg["actors"] = [{"id": 1, "class": "pedestrian"}]
        cfg["frames"] = 3
        cfg["raydrop"] = {"mode": "none"}
        cfg["trajectory"] = {"max_attempts": 3000}
        path = tmp_path / "ped.json"
        path.write_text(json.dumps(cfg))
        out = tmp_path / "out"
        assert run("--out-dir", out, "--seed", "2", "--config", path,
                   "simulate") == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["frames"]) == 3
        cloud = read_ply(out / "frame_0000.ply")
        assert len(cloud) > 0


class TestRaydropCommand:
    def test_apply_to_existing_scan(self, data_dir, tmp_path):
        out = tmp_path / "frames"
        cfg = json.loads((data_dir / "scan.json").read_text())
        cfg["lidar"] = str(data_dir / "lidar.json")
        cfg["scene"]["tsdf"] = str(data_dir / "plane.tsdf")
        scan_cfg = tmp_path / "scan.json"
        scan_cfg.write_text(json.dumps(cfg))
        assert run("--out-dir", out, "--config", scan_cfg, "scan") == 0
        assert run("--out-dir", tmp_path, "--seed", "1", "raydrop",
                   out / "frame_0000.rimg", out / "frame_0000.ply",
                   "--mode", "bernoulli") == 0
        masked = read_ply(tmp_path / "masked.ply")
        original = read_ply(out / "frame_0000.ply")
        assert 0 < len(masked) <= len(original)
