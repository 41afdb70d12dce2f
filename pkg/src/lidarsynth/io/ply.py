"""PLY point cloud export/import (binary little-endian) plus ASCII XYZ."""

from __future__ import annotations

import numpy as np

from ..sensor.cloud import PointCloud

_PROP_DTYPES = {
    "float": "<f4", "float32": "<f4", "double": "<f8", "float64": "<f8",
    "uchar": "u1", "uint8": "u1", "ushort": "<u2", "uint16": "<u2",
    "uint": "<u4", "uint32": "<u4", "int": "<i4", "int32": "<i4",
    "short": "<i2", "char": "i1",
}


def ply_bytes(pc: PointCloud) -> bytes:
    fields = [("x", "<f4"), ("y", "<f4"), ("z", "<f4")]
    header_props = ["property float x", "property float y", "property float z"]
    if pc.beam is not None:
        fields.append(("beam", "u1"))
        header_props.append("property uchar beam")
    if pc.azimuth is not None:
        fields.append(("azimuth", "<u2"))
        header_props.append("property ushort azimuth")
    if pc.label is not None:
        fields.append(("label", "<u2"))
        header_props.append("property ushort label")

    rec = np.empty(len(pc), dtype=fields)
    rec["x"] = pc.points[:, 0]
    rec["y"] = pc.points[:, 1]
    rec["z"] = pc.points[:, 2]
    if pc.beam is not None:
        rec["beam"] = pc.beam
    if pc.azimuth is not None:
        rec["azimuth"] = pc.azimuth
    if pc.label is not None:
        rec["label"] = pc.label

    header = "\n".join([
        "ply",
        "format binary_little_endian 1.0",
        f"comment frame {pc.frame}",
        f"element vertex {len(pc)}",
        *header_props,
        "end_header",
    ]) + "\n"
    return header.encode("ascii") + rec.tobytes()


def write_ply(path, pc: PointCloud):
    with open(path, "wb") as f:
        f.write(ply_bytes(pc))


def read_ply(path) -> PointCloud:
    with open(path, "rb") as f:
        data = f.read()
    end = data.find(b"end_header\n")
    if not data.startswith(b"ply") or end < 0:
        raise ValueError("not a PLY file")
    header = data[:end].decode("ascii").splitlines()
    body = data[end + len(b"end_header\n"):]

    n_vertex = 0
    frame = "sensor"
    fields = []
    fmt = None
    for line in header:
        tok = line.split()
        if not tok:
            continue
        if tok[0] == "format":
            fmt = tok[1]
        elif tok[0] == "comment" and len(tok) >= 3 and tok[1] == "frame":
            frame = tok[2]
        elif tok[0] == "element" and tok[1] == "vertex":
            n_vertex = int(tok[2])
        elif tok[0] == "property" and len(tok) == 3:
            if tok[1] not in _PROP_DTYPES:
                raise ValueError(f"unsupported property type {tok[1]}")
            fields.append((tok[2], _PROP_DTYPES[tok[1]]))
    if fmt != "binary_little_endian":
        raise ValueError(f"unsupported PLY format {fmt!r}")
    rec = np.frombuffer(body, dtype=fields, count=n_vertex)
    names = rec.dtype.names
    points = np.stack([rec["x"], rec["y"], rec["z"]], axis=1).astype(np.float64)
    return PointCloud(
        points, frame=frame,
        beam=rec["beam"].astype(np.int32) if "beam" in names else None,
        azimuth=rec["azimuth"].astype(np.int32) if "azimuth" in names else None,
        label=rec["label"].astype(np.int32) if "label" in names else None)


def write_xyz(path, pc: PointCloud):
    np.savetxt(path, pc.points, fmt="%.9g")


def read_xyz(path) -> PointCloud:
    pts = np.loadtxt(path, ndmin=2)
    if pts.size == 0:
        pts = np.zeros((0, 3))
    return PointCloud(pts[:, :3])
