"""Factor schema: how a flat renderer parameter vector and a flat latent code
split into named, typed factors.

The schema is data, not logic: it is loaded from a JSON config so the toy
8-factor schema and the full 12-factor schema share every code path. Head
rotation is deliberately *not* a factor -- it is fed straight to the decoder's
volume-rotation layer and never occupies latent dimensions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

DOMAIN_UNIT = "unit-interval"
DOMAIN_ONE_HOT = "one-hot"
DOMAIN_ANGLE = "angle-degrees"
DOMAIN_REAL = "unbounded-real"
_DOMAINS = (DOMAIN_UNIT, DOMAIN_ONE_HOT, DOMAIN_ANGLE, DOMAIN_REAL)


class FactorizationError(ValueError):
    """Raised for malformed schemas, unknown factors or out-of-domain values."""


@dataclass(frozen=True)
class FactorSpec:
    name: str
    theta_dim: int
    z_dim: int
    domain: str
    description: str = ""
    # half-open is not needed: angles live in the closed [range[0], range[1]]
    range: tuple[float, float] | None = None

    def __post_init__(self):
        if not self.name or not isinstance(self.name, str):
            raise FactorizationError("factor name must be a non-empty string")
        if self.theta_dim < 1 or self.z_dim < 1:
            raise FactorizationError(
                f"factor {self.name!r}: dims must be positive "
                f"(theta_dim={self.theta_dim}, z_dim={self.z_dim})"
            )
        if self.domain not in _DOMAINS:
            raise FactorizationError(
                f"factor {self.name!r}: unknown domain {self.domain!r}"
            )
        if self.domain == DOMAIN_ONE_HOT and self.theta_dim < 2:
            raise FactorizationError(
                f"factor {self.name!r}: one-hot needs theta_dim >= 2"
            )
        if self.domain == DOMAIN_ANGLE:
            if self.range is None:
                raise FactorizationError(
                    f"factor {self.name!r}: angle domain requires a range"
                )
            lo, hi = self.range
            if not lo < hi:
                raise FactorizationError(
                    f"factor {self.name!r}: empty angle range {self.range}"
                )

    def contains(self, part: np.ndarray, atol: float = 1e-6) -> bool:
        part = np.asarray(part, dtype=np.float64)
        if part.shape != (self.theta_dim,):
            return False
        if not np.all(np.isfinite(part)):
            return False
        if self.domain == DOMAIN_UNIT:
            return bool(np.all(part >= -atol) and np.all(part <= 1 + atol))
        if self.domain == DOMAIN_ONE_HOT:
            hard = np.all((np.abs(part) <= atol) | (np.abs(part - 1) <= atol))
            return bool(hard and abs(part.sum() - 1.0) <= atol)
        if self.domain == DOMAIN_ANGLE:
            lo, hi = self.range
            return bool(np.all(part >= lo - atol) and np.all(part <= hi + atol))
        return True

    def project(self, part: np.ndarray, relaxed_one_hot: bool = False) -> np.ndarray:
        """Project a candidate part onto the factor domain.

        One-hot parts are projected onto the probability simplex when
        ``relaxed_one_hot`` is set (what gradient-based inversion needs) and
        snapped to an argmax one-hot otherwise. Idempotent either way.
        """
        part = np.asarray(part, dtype=np.float64).reshape(self.theta_dim)
        if self.domain == DOMAIN_UNIT:
            return np.clip(part, 0.0, 1.0)
        if self.domain == DOMAIN_ANGLE:
            lo, hi = self.range
            return np.clip(part, lo, hi)
        if self.domain == DOMAIN_ONE_HOT:
            if relaxed_one_hot:
                clipped = np.clip(part, 0.0, None)
                s = clipped.sum()
                if s <= 0.0:
                    return np.full(self.theta_dim, 1.0 / self.theta_dim)
                return clipped / s
            out = np.zeros(self.theta_dim)
            out[int(np.argmax(part))] = 1.0
            return out
        return part

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        if self.domain == DOMAIN_UNIT:
            return rng.uniform(0.0, 1.0, self.theta_dim)
        if self.domain == DOMAIN_ONE_HOT:
            out = np.zeros(self.theta_dim)
            out[rng.integers(self.theta_dim)] = 1.0
            return out
        if self.domain == DOMAIN_ANGLE:
            lo, hi = self.range
            return rng.uniform(lo, hi, self.theta_dim)
        return rng.standard_normal(self.theta_dim)


@dataclass(frozen=True)
class Factorization:
    factors: tuple[FactorSpec, ...]
    rotation_limits_deg: tuple[float, float]  # (yaw, pitch)

    def __post_init__(self):
        names = [f.name for f in self.factors]
        if len(set(names)) != len(names):
            raise FactorizationError(f"duplicate factor names in {names}")
        if len(self.factors) == 0:
            raise FactorizationError("factorization needs at least one factor")
        yaw, pitch = self.rotation_limits_deg
        if yaw <= 0 or pitch <= 0:
            raise FactorizationError("rotation limits must be positive degrees")

    @property
    def k(self) -> int:
        return len(self.factors)

    @property
    def m(self) -> int:
        return sum(f.theta_dim for f in self.factors)

    @property
    def n(self) -> int:
        return sum(f.z_dim for f in self.factors)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.factors)

    def factor(self, name: str) -> FactorSpec:
        for f in self.factors:
            if f.name == name:
                return f
        raise FactorizationError(f"unknown factor {name!r}; have {self.names}")

    def index(self, name: str) -> int:
        for i, f in enumerate(self.factors):
            if f.name == name:
                return i
        raise FactorizationError(f"unknown factor {name!r}; have {self.names}")

    def theta_slice(self, name: str) -> slice:
        start = 0
        for f in self.factors:
            if f.name == name:
                return slice(start, start + f.theta_dim)
            start += f.theta_dim
        raise FactorizationError(f"unknown factor {name!r}; have {self.names}")

    def z_slice(self, name: str) -> slice:
        start = 0
        for f in self.factors:
            if f.name == name:
                return slice(start, start + f.z_dim)
            start += f.z_dim
        raise FactorizationError(f"unknown factor {name!r}; have {self.names}")

    def to_dict(self) -> dict:
        return {
            "factors": [
                {
                    "name": f.name,
                    "theta_dim": f.theta_dim,
                    "z_dim": f.z_dim,
                    "domain": f.domain,
                    "description": f.description,
                    **({"range": list(f.range)} if f.range is not None else {}),
                }
                for f in self.factors
            ],
            "rotation_limits_deg": {
                "yaw": self.rotation_limits_deg[0],
                "pitch": self.rotation_limits_deg[1],
            },
        }

    @staticmethod
    def from_dict(doc: Mapping) -> "Factorization":
        try:
            raw_factors = doc["factors"]
            limits = doc["rotation_limits_deg"]
            yaw, pitch = float(limits["yaw"]), float(limits["pitch"])
        except (KeyError, TypeError) as exc:
            raise FactorizationError(f"malformed factorization config: {exc}") from exc
        factors = []
        for item in raw_factors:
            try:
                factors.append(
                    FactorSpec(
                        name=item["name"],
                        theta_dim=int(item["theta_dim"]),
                        z_dim=int(item["z_dim"]),
                        domain=item["domain"],
                        description=item.get("description", ""),
                        range=tuple(item["range"]) if "range" in item else None,
                    )
                )
            except (KeyError, TypeError) as exc:
                raise FactorizationError(f"malformed factor entry {item!r}") from exc
        return Factorization(tuple(factors), (yaw, pitch))


def load_factorization(path: str | Path) -> Factorization:
    """Load and validate a factor schema from a JSON config file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise FactorizationError(f"{path}: not valid JSON: {exc}") from exc
    return Factorization.from_dict(doc)


@dataclass(frozen=True)
class ThetaVector:
    """A full renderer parameter vector, validated against its schema."""

    values: np.ndarray
    factorization: Factorization

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        f = self.factorization
        if values.shape != (f.m,):
            raise FactorizationError(
                f"theta has shape {values.shape}, schema wants ({f.m},)"
            )
        for spec in f.factors:
            part = values[f.theta_slice(spec.name)]
            if not spec.contains(part):
                raise FactorizationError(
                    f"factor {spec.name!r} value {part} outside domain {spec.domain}"
                )

    def part(self, name: str) -> np.ndarray:
        return self.values[self.factorization.theta_slice(name)]

    def replace_part(self, name: str, part: Sequence[float]) -> "ThetaVector":
        values = self.values.copy()
        values[self.factorization.theta_slice(name)] = np.asarray(part, dtype=np.float64)
        return ThetaVector(values, self.factorization)


@dataclass(frozen=True)
class LatentCode:
    """Factorized latent vector plus explicit head rotation in degrees."""

    z: np.ndarray
    rotation: tuple[float, float]  # (yaw, pitch), degrees
    factorization: Factorization

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.float32)
        object.__setattr__(self, "z", z)
        f = self.factorization
        if z.shape != (f.n,):
            raise FactorizationError(f"z has shape {z.shape}, schema wants ({f.n},)")
        yaw_lim, pitch_lim = f.rotation_limits_deg
        yaw, pitch = self.rotation
        if abs(yaw) > yaw_lim or abs(pitch) > pitch_lim:
            raise FactorizationError(
                f"rotation {self.rotation} outside limits "
                f"(±{yaw_lim}, ±{pitch_lim}) degrees"
            )

    def slice(self, name: str) -> np.ndarray:
        return self.z[self.factorization.z_slice(name)]

    def replace_slice(self, name: str, part: Sequence[float]) -> "LatentCode":
        z = self.z.copy()
        z[self.factorization.z_slice(name)] = np.asarray(part, dtype=np.float32)
        return LatentCode(z, self.rotation, self.factorization)


def pack_theta(parts: Iterable[Sequence[float]], f: Factorization) -> ThetaVector:
    """Concatenate per-factor parts, in schema order, into a ThetaVector."""
    parts = [np.asarray(p, dtype=np.float64) for p in parts]
    if len(parts) != f.k:
        raise FactorizationError(f"expected {f.k} parts, got {len(parts)}")
    for spec, part in zip(f.factors, parts):
        if part.shape != (spec.theta_dim,):
            raise FactorizationError(
                f"factor {spec.name!r}: part has shape {part.shape}, "
                f"wants ({spec.theta_dim},)"
            )
        if not spec.contains(part):
            raise FactorizationError(
                f"factor {spec.name!r} value {part} outside domain {spec.domain}"
            )
    return ThetaVector(np.concatenate(parts), f)


def unpack_theta(theta: ThetaVector) -> list[np.ndarray]:
    """Split a ThetaVector back into per-factor parts (inverse of pack_theta)."""
    f = theta.factorization
    return [theta.values[f.theta_slice(name)].copy() for name in f.names]


def slice_z(code: LatentCode, factor: str, f: Factorization | None = None) -> np.ndarray:
    """Return the contiguous latent segment belonging to one factor."""
    f = f if f is not None else code.factorization
    return np.asarray(code.z[f.z_slice(factor)])


def project_theta(theta: np.ndarray, f: Factorization, relaxed_one_hot: bool = False) -> np.ndarray:
    """Project a raw length-m vector factor-by-factor onto the schema domains."""
    theta = np.asarray(theta, dtype=np.float64).reshape(f.m)
    out = theta.copy()
    for spec in f.factors:
        sl = f.theta_slice(spec.name)
        out[sl] = spec.project(theta[sl], relaxed_one_hot=relaxed_one_hot)
    return out
