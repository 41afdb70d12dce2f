"""Little-endian binary containers for volumes, layouts, latents, range images.

Layouts (all little-endian, values after a 4-byte magic and u32 version=1):

  TSDF: u32 L W H, f32 voxel_size, 3 x f32 origin, L*W*H f32 values
        stored x-fastest (Fortran order over values[x, y, z]).
  LAYO: u32 L W M, f32 resolution, 2 x f32 origin, M planes of L*W u8
        stored x-fastest.
  LATN: u32 ndim, ndim x u32 extents, f32 data in C row-major order.
  RIMG: u32 B A, B*A f32 depths (beam-major), B*A u8 mask.

Floating payloads are stored at f32 precision; values already representable
in f32 round-trip bit-exactly.
"""

from __future__ import annotations

import struct

import numpy as np

from ..geometry.volume import TsdfVolume
from ..sensor.range_image import RangeImage

VERSION = 1


def _read_magic(f, expected: bytes):
    magic = f.read(4)
    if magic != expected:
        raise ValueError(f"bad magic {magic!r}, expected {expected!r}")
    (version,) = struct.unpack("<I", f.read(4))
    if version != VERSION:
        raise ValueError(f"unsupported container version {version}")


def write_tsdf(path, vol: TsdfVolume):
    l, w, h = vol.dims
    with open(path, "wb") as f:
        f.write(b"TSDF")
        f.write(struct.pack("<IIII", VERSION, l, w, h))
        f.write(struct.pack("<f", vol.voxel_size))
        f.write(np.asarray(vol.origin, dtype="<f4").tobytes())
        f.write(np.asarray(vol.values, dtype="<f4").ravel(order="F").tobytes())


def read_tsdf(path) -> TsdfVolume:
    with open(path, "rb") as f:
        _read_magic(f, b"TSDF")
        l, w, h = struct.unpack("<III", f.read(12))
        (voxel_size,) = struct.unpack("<f", f.read(4))
        origin = np.frombuffer(f.read(12), dtype="<f4").astype(np.float64)
        data = np.frombuffer(f.read(4 * l * w * h), dtype="<f4")
        values = data.reshape((l, w, h), order="F")
    return TsdfVolume(np.ascontiguousarray(values), float(voxel_size), origin)


def write_layout(path, layout):
    m, l, w = layout.channels.shape
    with open(path, "wb") as f:
        f.write(b"LAYO")
        f.write(struct.pack("<IIII", VERSION, l, w, m))
        f.write(struct.pack("<f", layout.resolution))
        f.write(np.asarray(layout.origin, dtype="<f4").tobytes())
        for c in range(m):
            f.write(layout.channels[c].astype(np.uint8).ravel(order="F").tobytes())


def read_layout(path):
    from ..world.layout import SemanticLayout
    with open(path, "rb") as f:
        _read_magic(f, b"LAYO")
        l, w, m = struct.unpack("<III", f.read(12))
        (resolution,) = struct.unpack("<f", f.read(4))
        origin = np.frombuffer(f.read(8), dtype="<f4").astype(np.float64)
        channels = np.empty((m, l, w), dtype=bool)
        for c in range(m):
            plane = np.frombuffer(f.read(l * w), dtype=np.uint8)
            channels[c] = plane.reshape((l, w), order="F") != 0
    return SemanticLayout(channels, float(resolution), origin)


def write_latent(path, latent):
    shape = latent.values.shape
    with open(path, "wb") as f:
        f.write(b"LATN")
        f.write(struct.pack("<II", VERSION, len(shape)))
        f.write(struct.pack(f"<{len(shape)}I", *shape))
        f.write(np.asarray(latent.values, dtype="<f4").tobytes())


def read_latent(path):
    from ..diffusion.latent import Latent
    with open(path, "rb") as f:
        _read_magic(f, b"LATN")
        (ndim,) = struct.unpack("<I", f.read(4))
        shape = struct.unpack(f"<{ndim}I", f.read(4 * ndim))
        n = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(f.read(4 * n), dtype="<f4").astype(np.float64)
    return Latent(data.reshape(shape))


def write_range_image(path, r: RangeImage):
    b, a = r.shape
    with open(path, "wb") as f:
        f.write(b"RIMG")
        f.write(struct.pack("<III", VERSION, b, a))
        f.write(np.asarray(r.depth, dtype="<f4").tobytes())
        f.write(r.mask.astype(np.uint8).tobytes())


def read_range_image(path) -> RangeImage:
    with open(path, "rb") as f:
        _read_magic(f, b"RIMG")
        b, a = struct.unpack("<II", f.read(8))
        depth = np.frombuffer(f.read(4 * b * a), dtype="<f4").astype(np.float64)
        mask = np.frombuffer(f.read(b * a), dtype=np.uint8).astype(bool)
    return RangeImage(depth.reshape(b, a), mask.reshape(b, a))
