"""Domain-shift perturbations that manufacture the unlabeled "real" domain.

The perturbation stack (texture field, background clutter, per-channel tone
curve, vignette, sensor noise) is unavailable to the synthetic branch, so a
deliberate, measurable gap separates the two image distributions. Labels are
copied from the renderer's theta rule and hidden behind the eval-only
accessor on RealSample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..factorization import ThetaVector
from .renderer import RealSample, labels_for, region_masks, render


@dataclass(frozen=True)
class PerturbConfig:
    strength: float = 1.0
    texture: float = 0.10
    clutter_alpha: float = 0.45
    tone_log2_gamma: float = 0.35
    gain: float = 0.08
    vignette: float = 0.22
    noise_sigma: float = 0.02

    def to_dict(self) -> dict:
        return {
            "strength": self.strength,
            "texture": self.texture,
            "clutter_alpha": self.clutter_alpha,
            "tone_log2_gamma": self.tone_log2_gamma,
            "gain": self.gain,
            "vignette": self.vignette,
            "noise_sigma": self.noise_sigma,
        }


def _bilinear_up(field: np.ndarray, size: int) -> np.ndarray:
    src = field.shape[0]
    pos = np.linspace(0, src - 1, size)
    i0 = np.floor(pos).astype(int)
    i1 = np.minimum(i0 + 1, src - 1)
    w = (pos - i0)[:, None]
    rows = field[i0] * (1 - w) + field[i1] * w
    w2 = (pos - i0)[None, :]
    return rows[:, i0] * (1 - w2) + rows[:, i1] * w2


def perturb_to_real(
    theta: ThetaVector,
    rotation: tuple[float, float],
    seed: int,
    config: PerturbConfig = PerturbConfig(),
) -> RealSample:
    """Render theta, then push the image through the real-domain shaders."""
    base = render(theta, rotation)
    labels = labels_for(theta)
    if config.strength == 0.0:
        return RealSample(base.image.copy(), labels, base.rotation)

    rng = np.random.Generator(np.random.PCG64(seed))
    s = config.strength
    img = (base.image.astype(np.float64) + 1.0) / 2.0

    field = rng.standard_normal((6, 6))
    tex = 1.0 + config.texture * s * _bilinear_up(field, img.shape[0])
    img = img * tex[:, :, None]

    bg = region_masks(theta, rotation)["background"]
    n_blobs = int(rng.integers(2, 6))
    size = img.shape[0]
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    for _ in range(n_blobs):
        cx, cyy = rng.uniform(0, size, 2)
        rx, ry = rng.uniform(4, 18, 2)
        col = rng.uniform(0.05, 0.95, 3)
        q = ((xx - cx) / rx) ** 2 + ((yy - cyy) / ry) ** 2
        alpha = np.clip(1.5 * (1 - q), 0, 1) * bg * (config.clutter_alpha * s)
        img = img * (1 - alpha[:, :, None]) + alpha[:, :, None] * col[None, None, :]

    gammas = 2.0 ** (rng.uniform(-1, 1, 3) * config.tone_log2_gamma * s)
    gains = 1.0 + rng.uniform(-1, 1, 3) * config.gain * s
    img = np.clip(img, 0.0, 1.0) ** gammas[None, None, :] * gains[None, None, :]

    r2 = ((xx - (size - 1) / 2) ** 2 + (yy - (size - 1) / 2) ** 2) / ((size / 2) ** 2)
    img = img * (1.0 - config.vignette * s * rng.uniform(0.3, 1.0) * r2[:, :, None] * 0.5)

    img = img + rng.standard_normal(img.shape) * config.noise_sigma * s
    img = np.clip(img, 0.0, 1.0) * 2.0 - 1.0
    return RealSample(img.astype(np.float32), labels, base.rotation)
