"""Annealing schedules for the samplers.

Levels are 1-based: k runs from K (largest noise) down to 1 (smallest).
sigma(k) is the forward-diffusion noise scale at level k and lam(k) the
Langevin step size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_K = 100
DEFAULT_SIGMA_MAX = 10.0
DEFAULT_SIGMA_MIN = 0.01
DEFAULT_ETA = 0.1
DEFAULT_STEPS_PER_LEVEL = 5


@dataclass
class NoiseSchedule:
    sigmas: np.ndarray      # (K,) ascending; sigmas[k-1] = sigma at level k
    lambdas: np.ndarray     # (K,) positive step sizes, same indexing

    def __post_init__(self):
        self.sigmas = np.asarray(self.sigmas, dtype=np.float64).reshape(-1)
        self.lambdas = np.asarray(self.lambdas, dtype=np.float64).reshape(-1)
        if len(self.sigmas) != len(self.lambdas) or len(self.sigmas) < 1:
            raise ValueError("need matching, non-empty sigma and lambda arrays")
        if self.sigmas[0] <= 0.0 or np.any(np.diff(self.sigmas) < 0):
            raise ValueError("sigmas must be positive and non-decreasing with k")
        if np.any(self.lambdas <= 0.0):
            raise ValueError("step sizes must be positive")

    @property
    def K(self) -> int:
        return len(self.sigmas)

    def sigma(self, k: int) -> float:
        self._check(k)
        return float(self.sigmas[k - 1])

    def lam(self, k: int) -> float:
        self._check(k)
        return float(self.lambdas[k - 1])

    def _check(self, k: int):
        if not 1 <= k <= self.K:
            raise ValueError(f"level {k} outside 1..{self.K}")

    @staticmethod
    def geometric(K: int = DEFAULT_K, sigma_max: float = DEFAULT_SIGMA_MAX,
                  sigma_min: float = DEFAULT_SIGMA_MIN,
                  eta: float = DEFAULT_ETA) -> "NoiseSchedule":
        """Geometric sigma ladder with lam_k = eta * sigma_k^2."""
        if K < 1 or sigma_min <= 0 or sigma_max < sigma_min or eta <= 0:
            raise ValueError("invalid schedule parameters")
        if K == 1:
            sigmas = np.array([sigma_max])
        else:
            sigmas = np.geomspace(sigma_min, sigma_max, K)
        return NoiseSchedule(sigmas, eta * sigmas ** 2)
