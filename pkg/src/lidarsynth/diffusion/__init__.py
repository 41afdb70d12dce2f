"""Latent-diffusion sampling engine with analytic Gaussian oracles."""

from .latent import Latent
from .models import Codec, GaussianScoreModel, IdentityCodec, ScoreModel
from .sampling import (cfg_score, forward_diffuse, langevin_step,
                       sample_euler, sample_langevin, score_matching_loss)
from .schedule import DEFAULT_STEPS_PER_LEVEL, NoiseSchedule

__all__ = [
    "Latent", "Codec", "GaussianScoreModel", "IdentityCodec", "ScoreModel",
    "cfg_score", "forward_diffuse", "langevin_step", "sample_euler",
    "sample_langevin", "score_matching_loss", "NoiseSchedule",
    "DEFAULT_STEPS_PER_LEVEL",
]
