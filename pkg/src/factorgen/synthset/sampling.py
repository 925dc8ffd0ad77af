"""Seeded sampling of renderer parameters and head rotations."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..factorization import Factorization, ThetaVector
from .renderer import labels_for


def sample_theta(seed: int, f: Factorization) -> ThetaVector:
    """Draw every factor uniformly from its domain; deterministic per seed."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return sample_theta_rng(rng, f)


def sample_theta_rng(rng: np.random.Generator, f: Factorization) -> ThetaVector:
    parts = [spec.sample(rng) for spec in f.factors]
    return ThetaVector(np.concatenate(parts), f)


def sample_rotation_rng(rng: np.random.Generator, f: Factorization) -> tuple[float, float]:
    yaw_lim, pitch_lim = f.rotation_limits_deg
    return (float(rng.uniform(-yaw_lim, yaw_lim)), float(rng.uniform(-pitch_lim, pitch_lim)))


def sample_scene(seed: int, f: Factorization) -> tuple[ThetaVector, tuple[float, float]]:
    rng = np.random.Generator(np.random.PCG64(seed))
    theta = sample_theta_rng(rng, f)
    return theta, sample_rotation_rng(rng, f)


def violates_exclusions(theta: ThetaVector, excluded_combos: Sequence[Sequence[str]]) -> bool:
    if not excluded_combos:
        return False
    labels = labels_for(theta)
    return any(all(labels.get(name, 0) == 1 for name in combo) for combo in excluded_combos)


def sample_scenes(
    n: int,
    seed: int,
    f: Factorization,
    excluded_combos: Sequence[Sequence[str]] = (),
    max_tries: int = 200,
) -> list[tuple[ThetaVector, tuple[float, float]]]:
    """Sample n (theta, rotation) scenes, rejecting excluded label combos."""
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    while len(out) < n:
        for _ in range(max_tries):
            theta = sample_theta_rng(rng, f)
            if not violates_exclusions(theta, excluded_combos):
                break
        else:
            raise RuntimeError("exclusion rules reject every sampled theta")
        out.append((theta, sample_rotation_rng(rng, f)))
    return out
