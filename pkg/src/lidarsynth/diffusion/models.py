"""Pluggable score models and latent codecs, with analytic stand-ins.

A ScoreModel declares its output convention: "score" (gradient of the log
density) or "epsilon" (noise prediction). Samplers convert epsilon outputs to
scores via score = -eps_hat / sigma_k.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from ..geometry.volume import TsdfVolume
from .latent import Latent

CONVENTIONS = ("score", "epsilon")


class ScoreModel:
    """Interface: evaluate(z, k, cond) -> Latent of the same shape.

    `cond` is None for the unconditional branch. Implementations must be safe
    for concurrent evaluate calls.
    """

    convention: str = "score"

    def evaluate(self, z: Latent, k: int, cond=None) -> Latent:
        raise NotImplementedError


def _cond_id(cond) -> Optional[int]:
    if cond is None:
        return None
    if isinstance(cond, Latent):
        return int(round(float(cond.flat()[0])))
    return int(cond)


@dataclass
class GaussianScoreModel(ScoreModel):
    """Analytic oracle: score of N(mu, variance * I), ignoring the level k.

    Means broadcast against the trailing axis of z, so a (chains, dim) latent
    evaluates all chains at once.
    """

    means: Dict[int, np.ndarray]
    mean_uncond: np.ndarray
    variance: float = 1.0

    convention = "score"

    def __post_init__(self):
        self.means = {int(c): np.asarray(m, dtype=np.float64).reshape(-1)
                      for c, m in self.means.items()}
        self.mean_uncond = np.asarray(self.mean_uncond, dtype=np.float64).reshape(-1)
        if self.variance <= 0.0:
            raise ValueError("variance must be positive")

    def mean_for(self, cond) -> np.ndarray:
        cid = _cond_id(cond)
        if cid is None:
            return self.mean_uncond
        if cid not in self.means:
            raise KeyError(f"no mean for condition id {cid}")
        return self.means[cid]

    def evaluate(self, z: Latent, k: int, cond=None) -> Latent:
        mu = self.mean_for(cond)
        return Latent(-(z.values - mu) / self.variance)

    def to_dict(self) -> dict:
        return {
            "variance": self.variance,
            "mean_uncond": self.mean_uncond.tolist(),
            "means": {str(c): m.tolist() for c, m in self.means.items()},
        }

    @staticmethod
    def from_dict(d: dict) -> "GaussianScoreModel":
        return GaussianScoreModel(
            {int(c): np.asarray(m, dtype=float) for c, m in d.get("means", {}).items()},
            np.asarray(d["mean_uncond"], dtype=float),
            float(d.get("variance", 1.0)))

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)

    @staticmethod
    def load(path) -> "GaussianScoreModel":
        with open(path) as f:
            return GaussianScoreModel.from_dict(json.load(f))


class Codec:
    """Interface between domain objects and latent codes."""

    def encode(self, obj) -> Latent:
        raise NotImplementedError

    def decode(self, latent: Latent):
        raise NotImplementedError


@dataclass
class IdentityCodec(Codec):
    """Flattens TSDF values; decode clips back into the legal value range.

    Round trip: decode(encode(v)) == v for any valid volume; encode(decode(z))
    clips z to [-1, 1].
    """

    dims: tuple
    voxel_size: float
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def encode(self, vol: TsdfVolume) -> Latent:
        if tuple(vol.dims) != tuple(self.dims):
            raise ValueError("volume dims do not match the codec")
        return Latent(np.asarray(vol.values, dtype=np.float64).reshape(-1))

    def decode(self, latent: Latent) -> TsdfVolume:
        values = np.clip(latent.flat(), -1.0, 1.0).reshape(self.dims)
        return TsdfVolume(values.astype(np.float32), self.voxel_size,
                          np.asarray(self.origin, dtype=float))
