"""Command-line entry points.

Exit codes: 0 success, 2 validation/usage error, 1 runtime failure. Logs go
to stderr; data goes to files (or stdout for `eval` JSON reports).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lidarsynth",
        description="Compose 4D driving worlds and simulate LiDAR scan videos.")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the RNG seed from the config")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for frame simulation")
    parser.add_argument("--out-dir", default=".", help="output directory")
    parser.add_argument("--config", default=None, help="JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rasterize", help="rasterize a vector map into a layout")
    p.add_argument("vector_map", help="vector map JSON")
    p.add_argument("--center", nargs=3, type=float, default=(0.0, 0.0, 0.0),
                   metavar=("X", "Y", "HEADING"))
    p.add_argument("--dims", nargs=2, type=int, default=(100, 100), metavar=("L", "W"))
    p.add_argument("--resolution", type=float, default=0.5)
    p.add_argument("--out", default="layout.layo")

    p = sub.add_parser("mesh", help="extract an OBJ mesh from a TSDF volume")
    p.add_argument("tsdf")
    p.add_argument("--iso", type=float, default=0.0)
    p.add_argument("--out", default="mesh.obj")

    p = sub.add_parser("scan", help="simulate a single frame (config JSON)")

    p = sub.add_parser("simulate", help="run the full pipeline (config JSON)")
    p.add_argument("--accumulate", action="store_true",
                   help="also write the world-frame accumulated cloud")

    p = sub.add_parser("sample", help="draw a latent sample (config JSON)")
    p.add_argument("--out", default="sample.latn")
    p.add_argument("--tsdf-out", default=None,
                   help="also decode the sample into a TSDF file")

    p = sub.add_parser("raydrop", help="apply raydrop to an existing scan")
    p.add_argument("range_image", help="RIMG file")
    p.add_argument("ply", help="matching PLY file with beam/azimuth fields")
    p.add_argument("--mode", choices=("gumbel", "bernoulli", "none"), default="gumbel")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--a", type=float, default=4.0)
    p.add_argument("--b", type=float, default=0.05)
    p.add_argument("--c", type=float, default=2.0)

    p = sub.add_parser("eval", help="compute a metric over PLY inputs")
    p.add_argument("metric", choices=("mmd", "jsd", "consistency", "chamfer"))
    p.add_argument("inputs", nargs="+",
                   help="PLY files (or directories of PLY files for mmd/jsd)")
    p.add_argument("--extent", type=float, default=50.0)
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--bandwidth", type=float, default=None)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--dump-histograms", action="store_true",
                   help="write aggregate occupancy grids as LAYO files")

    sub.add_parser("gen-testdata", help="write the demo dataset to --out-dir")
    return parser


def _gather_plys(path: str) -> list:
    p = Path(path)
    if p.is_dir():
        files = sorted(p.glob("*.ply"))
        if not files:
            raise ValueError(f"no PLY files under {path}")
        return [str(f) for f in files]
    return [str(p)]


def _cmd_rasterize(args) -> int:
    from .io.container import write_layout
    from .world.layout import VectorMap, rasterize_map
    vm = VectorMap.load(args.vector_map)
    layout = rasterize_map(vm, tuple(args.center), tuple(args.dims), args.resolution)
    out = Path(args.out_dir) / args.out
    write_layout(out, layout)
    print(f"wrote {out}", file=sys.stderr)
    return 0


def _cmd_mesh(args) -> int:
    from .geometry.marching import extract_mesh
    from .io.container import read_tsdf
    from .io.obj import write_obj
    mesh = extract_mesh(read_tsdf(args.tsdf), args.iso)
    out = Path(args.out_dir) / args.out
    write_obj(out, mesh)
    print(f"wrote {out} ({mesh.n_triangles} triangles)", file=sys.stderr)
    return 0


def _load_pipeline_config(args):
    from .pipeline import load_config
    if args.config is None:
        raise ValueError("this command needs --config")
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _cmd_scan(args) -> int:
    from .pipeline import run_pipeline
    cfg = _load_pipeline_config(args)
    cfg.frames = 1
    result = run_pipeline(cfg, args.out_dir, threads=args.threads)
    print(f"wrote {len(result.manifest['outputs'])} files to {result.out_dir}",
          file=sys.stderr)
    return 0


def _cmd_simulate(args) -> int:
    from .pipeline import run_pipeline
    cfg = _load_pipeline_config(args)
    if args.accumulate:
        cfg.accumulate = True
    result = run_pipeline(cfg, args.out_dir, threads=args.threads)
    print(f"wrote {len(result.manifest['outputs'])} files to {result.out_dir}",
          file=sys.stderr)
    return 0


def _cmd_sample(args) -> int:
    from .io.container import write_latent, write_tsdf
    from .pipeline import _sample_volume
    if args.config is None:
        raise ValueError("sample needs --config")
    with open(args.config) as f:
        spec = json.load(f)
    base = Path(args.config).resolve().parent
    spec["model"] = str((base / spec["model"]).resolve())
    seed = args.seed if args.seed is not None else int(spec.get("seed", 0))
    vol = _sample_volume(spec, seed)
    from .diffusion.latent import Latent
    out = Path(args.out_dir) / args.out
    write_latent(out, Latent(np.asarray(vol.values, dtype=np.float64).reshape(-1)))
    print(f"wrote {out}", file=sys.stderr)
    if args.tsdf_out:
        tsdf_path = Path(args.out_dir) / args.tsdf_out
        write_tsdf(tsdf_path, vol)
        print(f"wrote {tsdf_path}", file=sys.stderr)
    return 0


def _cmd_raydrop(args) -> int:
    from .io.container import read_range_image, write_range_image
    from .io.ply import read_ply, write_ply
    from .sensor.raydrop import AnalyticRaydrop, apply_raydrop
    img = read_range_image(args.range_image)
    cloud = read_ply(args.ply)
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    model = AnalyticRaydrop(args.a, args.b, args.c)
    img2, cloud2 = apply_raydrop(img, cloud, model, args.mode, args.temperature, rng)
    out = Path(args.out_dir)
    write_range_image(out / "masked.rimg", img2)
    write_ply(out / "masked.ply", cloud2)
    print(f"kept {len(cloud2)}/{len(cloud)} points", file=sys.stderr)
    return 0


def _cmd_eval(args) -> int:
    from .io.ply import read_ply
    from .metrics.bev import aggregate, bev_histogram, jsd, mmd
    from .metrics.registration import sequence_consistency
    from .metrics.registration import chamfer as chamfer_fn

    params = {"extent": args.extent, "grid": args.grid}
    if args.metric == "chamfer":
        if len(args.inputs) != 2:
            raise ValueError("chamfer needs exactly two PLY files")
        a, b = read_ply(args.inputs[0]), read_ply(args.inputs[1])
        value = chamfer_fn(a, b)
        params = {}
    elif args.metric == "consistency":
        files = args.inputs if len(args.inputs) > 1 else _gather_plys(args.inputs[0])
        if len(files) < 2:
            raise ValueError("consistency needs at least two scans")
        report = sequence_consistency([read_ply(f) for f in files], tau=args.tau)
        value = report.to_dict()
        params = {"tau": args.tau}
    else:
        if len(args.inputs) != 2:
            raise ValueError(f"{args.metric} needs two inputs (files or directories)")
        hist_a = [bev_histogram(read_ply(f), args.extent, args.grid)
                  for f in _gather_plys(args.inputs[0])]
        hist_b = [bev_histogram(read_ply(f), args.extent, args.grid)
                  for f in _gather_plys(args.inputs[1])]
        if args.dump_histograms:
            from .io.container import write_layout
            from .metrics.bev import occupancy_layout
            for name, hists in (("hist_a.layo", hist_a), ("hist_b.layo", hist_b)):
                write_layout(Path(args.out_dir) / name,
                             occupancy_layout(aggregate(hists)))
        if args.metric == "jsd":
            value = jsd(aggregate(hist_a), aggregate(hist_b))
            params["log_base"] = "e"
        else:
            from .metrics.bev import median_bandwidth
            bw = args.bandwidth if args.bandwidth is not None \
                else median_bandwidth(hist_a, hist_b)
            value = mmd(hist_a, hist_b, bw)
            params["bandwidth"] = bw
    print(json.dumps({"metric": args.metric, "value": value,
                      "parameters": params, "inputs": args.inputs}, indent=2))
    return 0


def _cmd_gen_testdata(args) -> int:
    from .testdata import write_testdata
    created = write_testdata(args.out_dir)
    for name in created:
        print(f"wrote {Path(args.out_dir) / name}", file=sys.stderr)
    return 0


_COMMANDS = {
    "rasterize": _cmd_rasterize,
    "mesh": _cmd_mesh,
    "scan": _cmd_scan,
    "simulate": _cmd_simulate,
    "sample": _cmd_sample,
    "raydrop": _cmd_raydrop,
    "eval": _cmd_eval,
    "gen-testdata": _cmd_gen_testdata,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, KeyError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # runtime failures, including pipeline aborts
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
