"""Stochastic raydrop: per-pixel return probabilities and keep-mask sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .cloud import PointCloud
from .range_image import RangeImage

MODES = ("gumbel", "bernoulli", "none")


class RaydropModel:
    """Predicts the probability that each pixel's ray returns to the sensor
    (drop probability is 1 - p). Implementations override probabilities()."""

    def probabilities(self, r: RangeImage) -> np.ndarray:
        raise NotImplementedError


@dataclass
class AnalyticRaydrop(RaydropModel):
    """Return probability sigmoid(a - b*depth - c*grazing).

    `grazing` is 1 - |cos| of the incidence angle when the range image carries
    an incidence grid (scans from simulate_scan do), and 0 otherwise.
    """

    a: float = 4.0
    b: float = 0.05    # per meter
    c: float = 2.0

    def probabilities(self, r: RangeImage) -> np.ndarray:
        grazing = 0.0 if r.incidence is None else 1.0 - r.incidence
        x = self.a - self.b * r.depth - self.c * grazing
        p = 1.0 / (1.0 + np.exp(-x))
        return np.where(r.mask, p, 0.0)


def gumbel_sigmoid_sample(p: np.ndarray, temperature: float,
                          rng: np.random.Generator, mode: str = "gumbel") -> np.ndarray:
    """Boolean keep-mask from per-pixel keep probabilities.

    gumbel:    keep iff sigmoid((logit(p) + g1 - g2) / temperature) > 0.5 with
               g1, g2 ~ Gumbel(0, 1); the threshold test reduces to
               logit(p) + g1 - g2 > 0, which keeps with probability exactly p
               for any temperature (g1 - g2 is standard logistic).
    bernoulli: keep independently with probability p.
    none:      keep everything.
    """
    p = np.asarray(p, dtype=np.float64)
    if np.any((p < 0.0) | (p > 1.0)):
        raise ValueError("probabilities must lie in [0, 1]")
    if mode == "none":
        return np.ones(p.shape, dtype=bool)
    if mode == "bernoulli":
        return rng.random(p.shape) < p
    if mode == "gumbel":
        if temperature <= 0.0:
            raise ValueError("gumbel mode needs a positive temperature")
        g = rng.gumbel(0.0, 1.0, size=(2,) + p.shape)
        with np.errstate(divide="ignore"):
            logit = np.log(p) - np.log1p(-p)
        return (logit + g[0] - g[1]) / temperature > 0.0
    raise ValueError(f"unknown raydrop mode {mode!r}")


def apply_raydrop(r: RangeImage, pc: PointCloud, model: RaydropModel,
                  mode: str = "gumbel", temperature: float = 1.0,
                  rng: np.random.Generator | None = None
                  ) -> Tuple[RangeImage, PointCloud]:
    """Drop pixels by sampled keep-mask and remove the matching points.

    The cloud must carry the (beam, azimuth) indices produced by
    simulate_scan. Outputs are subsets of the inputs.
    """
    if mode == "none":
        return r, pc
    if rng is None:
        rng = np.random.default_rng()
    if pc.beam is None or pc.azimuth is None:
        raise ValueError("cloud lacks beam/azimuth indices for raydrop")
    p = model.probabilities(r)
    keep = gumbel_sigmoid_sample(p, temperature, rng, mode)
    new_mask = r.mask & keep
    new_depth = np.where(new_mask, r.depth, 0.0)
    incidence = None if r.incidence is None else np.where(new_mask, r.incidence, 0.0)
    img = RangeImage(new_depth, new_mask, r.config, incidence=incidence)
    return img, pc.subset(new_mask[pc.beam, pc.azimuth])
