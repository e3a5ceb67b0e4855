from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NoiseConfig:
    """Gaussian noise on actions (normalized units) and observations (native units), clipped at ``clip_k`` sigma."""

    sigma_action: float = 0.01
    sigma_obs: float = 0.005
    clip_k: float = 3.0

    def __post_init__(self):
        if self.sigma_action < 0 or self.sigma_obs < 0:
            raise ValueError(f"noise sigmas must be non-negative, got {self.sigma_action} and {self.sigma_obs}")
        if self.clip_k <= 0:
            raise ValueError(f"clip_k must be positive, got {self.clip_k}")

    @property
    def enabled(self):
        return self.sigma_action > 0 or self.sigma_obs > 0


def inject_noise(vector, sigma, clip_k, rng):
    """Add i.i.d. Gaussian noise to every component, each sample clipped to ``[-clip_k * sigma, clip_k * sigma]``.

    With ``sigma == 0`` the input is returned unchanged and the generator is not advanced.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    vector = np.asarray(vector, dtype=np.float64)
    if sigma == 0:
        return vector.copy()
    bound = clip_k * sigma
    return vector + np.clip(rng.normal(0.0, sigma, size=vector.shape), -bound, bound)
