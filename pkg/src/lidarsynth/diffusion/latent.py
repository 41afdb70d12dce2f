"""Latent codes: thin shaped wrappers over float64 arrays."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np


@dataclass
class Latent:
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.size == 0:
            raise ValueError("latent must hold at least one value")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("latent values must be finite")

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def copy(self) -> "Latent":
        return Latent(self.values.copy())
