"""Samplers over pluggable score models.

Guided model outputs combine as (1 + w) * F(z, c) - w * F(z) and are
interpreted per the model's convention before stepping:

  Langevin level step:  z <- z + (lam_k / 2) * score + sqrt(lam_k) * eps
  Euler flow step:      z <- z + (sigma_k - sigma_{k-1}) * sigma_k * score

with sigma_0 = 0. Both samplers initialize z ~ N(0, sigma_K^2 I) and are
deterministic functions of (inputs, rng state). Latents of shape
(chains, dim) run independent chains in one call.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .latent import Latent
from .models import ScoreModel
from .schedule import DEFAULT_STEPS_PER_LEVEL, NoiseSchedule


def cfg_score(model: ScoreModel, z: Latent, k: int, cond, w: float) -> Latent:
    """Classifier-free-guided model output, in the model's own convention."""
    if cond is None and w != 0.0:
        raise ValueError("guidance needs a condition when w != 0")
    if w == 0.0:
        return model.evaluate(z, k, cond)
    f_cond = model.evaluate(z, k, cond)
    f_uncond = model.evaluate(z, k, None)
    return Latent((1.0 + w) * f_cond.values - w * f_uncond.values)


def _as_score(values: np.ndarray, convention: str, sigma_k: float) -> np.ndarray:
    if convention == "score":
        return values
    if convention == "epsilon":
        return -values / sigma_k
    raise ValueError(f"unknown model convention {convention!r}")


def langevin_step(z: Latent, score: Latent, lam: float,
                  rng: Optional[np.random.Generator]) -> Latent:
    """One noisy ascent step; rng=None suppresses the noise term."""
    if lam <= 0.0:
        raise ValueError("step size must be positive")
    if z.shape != score.shape:
        raise ValueError("score shape must match the latent")
    out = z.values + (lam / 2.0) * score.values
    if rng is not None:
        out = out + np.sqrt(lam) * rng.standard_normal(z.shape)
    return Latent(out)


def sample_langevin(model: ScoreModel, sched: NoiseSchedule, cond, w: float,
                    steps_per_level: int = DEFAULT_STEPS_PER_LEVEL,
                    rng: Optional[np.random.Generator] = None,
                    shape=(1,)) -> Latent:
    """Annealed Langevin chain from noise to a clean sample."""
    if rng is None:
        rng = np.random.default_rng()
    if steps_per_level < 1:
        raise ValueError("steps_per_level must be >= 1")
    z = Latent(sched.sigma(sched.K) * rng.standard_normal(shape))
    for k in range(sched.K, 0, -1):
        lam = sched.lam(k)
        sigma = sched.sigma(k)
        for _ in range(steps_per_level):
            guided = cfg_score(model, z, k, cond, w)
            score = Latent(_as_score(guided.values, model.convention, sigma))
            z = langevin_step(z, score, lam, rng)
    return z


def sample_euler(model: ScoreModel, sched: NoiseSchedule, cond, w: float,
                 rng: Optional[np.random.Generator] = None,
                 shape=(1,)) -> Latent:
    """Probability-flow sampler; noise enters only at initialization."""
    if rng is None:
        rng = np.random.default_rng()
    z = Latent(sched.sigma(sched.K) * rng.standard_normal(shape))
    for k in range(sched.K, 0, -1):
        sigma = sched.sigma(k)
        sigma_prev = sched.sigma(k - 1) if k > 1 else 0.0
        guided = cfg_score(model, z, k, cond, w)
        score = _as_score(guided.values, model.convention, sigma)
        z = Latent(z.values + (sigma - sigma_prev) * sigma * score)
    return z


def forward_diffuse(z0: Latent, k: int, sched: NoiseSchedule,
                    rng: np.random.Generator) -> Latent:
    """Noisy sample at level k: z0 + sigma_k * eps."""
    sigma = sched.sigma(k)   # validates 1 <= k <= K
    return Latent(z0.values + sigma * rng.standard_normal(z0.shape))


def score_matching_loss(model: ScoreModel, z0: Latent, cond,
                        sched: NoiseSchedule, rng: np.random.Generator,
                        n_samples: int) -> float:
    """Monte Carlo denoising loss E ||eps - eps_hat(z_k, k, c)||^2.

    Per sample the rng draws the level k first, then eps, in that order.
    Score-convention models are read as eps_hat = -output * sigma_k.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    total = 0.0
    for _ in range(n_samples):
        k = int(rng.integers(1, sched.K + 1))
        eps = rng.standard_normal(z0.shape)
        sigma = sched.sigma(k)
        z_k = Latent(z0.values + sigma * eps)
        out = model.evaluate(z_k, k, cond).values
        eps_hat = out if model.convention == "epsilon" else -out * sigma
        total += float(np.sum((eps - eps_hat) ** 2))
    return total / n_samples
