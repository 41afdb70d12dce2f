"""Minimal ASCII OBJ mesh import/export: `v x y z` and `f i j k` records."""

from __future__ import annotations

import numpy as np

from ..geometry.mesh import TriMesh


def write_obj(path, mesh: TriMesh):
    with open(path, "w") as f:
        for v in mesh.vertices:
            f.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for t in mesh.triangles + 1:   # OBJ indices are 1-based
            f.write(f"f {t[0]} {t[1]} {t[2]}\n")


def read_obj(path) -> TriMesh:
    verts, faces = [], []
    with open(path) as f:
        for line in f:
            tok = line.split()
            if not tok or tok[0].startswith("#"):
                continue
            if tok[0] == "v":
                verts.append([float(x) for x in tok[1:4]])
            elif tok[0] == "f":
                idx = [int(t.split("/")[0]) for t in tok[1:]]
                idx = [i - 1 if i > 0 else len(verts) + i for i in idx]
                for k in range(1, len(idx) - 1):    # fan-triangulate polygons
                    faces.append([idx[0], idx[k], idx[k + 1]])
    verts = np.asarray(verts, dtype=np.float64) if verts else np.zeros((0, 3))
    faces = np.asarray(faces, dtype=np.int32) if faces else np.zeros((0, 3), dtype=np.int32)
    return TriMesh(verts, faces)
