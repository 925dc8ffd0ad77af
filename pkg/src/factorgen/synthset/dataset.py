"""Dataset serialization: manifest + 8-bit PNGs + JSON ground truth.

Layout on disk (synthetic kind):

    manifest.json          renderer version, factorization, thresholds,
                           per-file sha256 hashes, dataset content hash
    images/00000.png       uint8, symmetric quantization by 127.5
    masks/00000.png        iris masks, 0/255
    theta.json             [[m floats], ...]
    rotations.json         [[yaw, pitch], ...]
    labels.json            {attribute: [0/1, ...]}

The real kind stores hidden ground truth under hidden/ instead of masks and
theta; training code reads real images through RealDatasetView which exposes
images only.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from ..factorization import Factorization, ThetaVector
from .renderer import IMG_SIZE, RENDERER_VERSION, LABEL_THRESHOLDS, RealSample, SynthSample

SCHEMA_VERSION = 1


class DatasetError(RuntimeError):
    pass


def quantize_image(img: np.ndarray) -> np.ndarray:
    """[-1, 1] float -> uint8 with the dataset's declared quantization."""
    return np.clip(np.round((img.astype(np.float64) + 1.0) * 127.5), 0, 255).astype(np.uint8)


def dequantize_image(q: np.ndarray) -> np.ndarray:
    return (q.astype(np.float32) / 127.5 - 1.0).astype(np.float32)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _write_png(path: Path, arr: np.ndarray):
    Image.fromarray(arr).save(path, format="PNG")


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, separators=(",", ":")))


def write_dataset(
    samples: Sequence[SynthSample] | Sequence[RealSample],
    path: str | Path,
    factorization: Factorization,
    kind: str = "synth",
    perturb_config: dict | None = None,
    excluded_combos: Sequence[Sequence[str]] = (),
) -> dict:
    """Write samples to disk; returns the manifest dict."""
    if kind not in ("synth", "real"):
        raise DatasetError(f"unknown dataset kind {kind!r}")
    path = Path(path)
    (path / "images").mkdir(parents=True, exist_ok=True)
    files: dict[str, str] = {}

    if kind == "synth":
        (path / "masks").mkdir(exist_ok=True)
        thetas, rotations, labels = [], [], []
        for i, s in enumerate(samples):
            name = f"{i:05d}.png"
            _write_png(path / "images" / name, quantize_image(s.image))
            _write_png(path / "masks" / name, (s.eye_mask * 255).astype(np.uint8))
            files[f"images/{name}"] = _sha256(path / "images" / name)
            files[f"masks/{name}"] = _sha256(path / "masks" / name)
            thetas.append([float(v) for v in s.theta.values])
            rotations.append([float(s.rotation[0]), float(s.rotation[1])])
            labels.append(s.labels)
        label_cols = {k: [int(l[k]) for l in labels] for k in (labels[0] if labels else {})}
        _dump_json(path / "theta.json", thetas)
        _dump_json(path / "rotations.json", rotations)
        _dump_json(path / "labels.json", label_cols)
        for f in ("theta.json", "rotations.json", "labels.json"):
            files[f] = _sha256(path / f)
    else:
        (path / "hidden").mkdir(exist_ok=True)
        labels, rotations = [], []
        for i, s in enumerate(samples):
            name = f"{i:05d}.png"
            _write_png(path / "images" / name, quantize_image(s.image))
            files[f"images/{name}"] = _sha256(path / "images" / name)
            labels.append(s._hidden_labels)
            rotations.append(list(s._hidden_rotation))
        label_cols = {k: [int(l[k]) for l in labels] for k in (labels[0] if labels else {})}
        _dump_json(path / "hidden" / "labels.json", label_cols)
        _dump_json(path / "hidden" / "rotations.json", rotations)
        files["hidden/labels.json"] = _sha256(path / "hidden" / "labels.json")
        files["hidden/rotations.json"] = _sha256(path / "hidden" / "rotations.json")

    content_hash = hashlib.sha256(
        "".join(f"{k}:{v}" for k, v in sorted(files.items())).encode()
    ).hexdigest()
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "renderer_version": RENDERER_VERSION,
        "image_size": IMG_SIZE,
        "quantization": "uint8, x8 = round((x + 1) * 127.5)",
        "count": len(samples),
        "factorization": factorization.to_dict(),
        "label_thresholds": LABEL_THRESHOLDS,
        "perturb_config": perturb_config,
        "excluded_label_combos": [list(c) for c in excluded_combos],
        "files": files,
        "content_hash": content_hash,
    }
    _dump_json(path / "manifest.json", manifest)
    return manifest


def _load_verified(path: Path, manifest: dict, rel: str) -> Path:
    p = path / rel
    if not p.exists():
        raise DatasetError(f"{rel} listed in manifest but missing on disk")
    if _sha256(p) != manifest["files"][rel]:
        raise DatasetError(f"{rel}: content hash mismatch (corrupted dataset)")
    return p


@dataclass
class SynthDatasetView:
    factorization: Factorization
    thetas: np.ndarray        # (N, m) float64
    rotations: np.ndarray     # (N, 2) float64
    images_u8: np.ndarray     # (N, H, W, 3) uint8
    eye_masks: np.ndarray     # (N, H, W) uint8
    labels: dict[str, np.ndarray]
    manifest: dict

    def __len__(self):
        return self.images_u8.shape[0]

    def image_float(self, idx) -> np.ndarray:
        return dequantize_image(self.images_u8[idx])

    def theta(self, i: int) -> ThetaVector:
        return ThetaVector(self.thetas[i], self.factorization)


class RealDatasetView:
    """Training-facing view of a real dataset: images only.

    Ground truth is reachable only through the hidden_* methods, which count
    accesses on RealSample so instrumentation tests can prove the trainer
    never called them.
    """

    def __init__(self, factorization, images_u8, hidden_labels, hidden_rotations, manifest):
        self.factorization = factorization
        self.images_u8 = images_u8
        self._hidden_labels = hidden_labels
        self._hidden_rotations = hidden_rotations
        self.manifest = manifest

    def __len__(self):
        return self.images_u8.shape[0]

    def image_float(self, idx) -> np.ndarray:
        return dequantize_image(self.images_u8[idx])

    def hidden_labels(self) -> dict[str, np.ndarray]:
        RealSample.hidden_access_count += 1
        return {k: v.copy() for k, v in self._hidden_labels.items()}

    def hidden_rotations(self) -> np.ndarray:
        RealSample.hidden_access_count += 1
        return self._hidden_rotations.copy()


def read_dataset(path: str | Path):
    """Load a dataset directory back, verifying every content hash."""
    path = Path(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.exists():
        raise DatasetError(f"{path}: no manifest.json")
    manifest = json.loads(manifest_path.read_text())
    f = Factorization.from_dict(manifest["factorization"])
    n = manifest["count"]
    images = np.zeros((n, IMG_SIZE, IMG_SIZE, 3), dtype=np.uint8)
    for i in range(n):
        p = _load_verified(path, manifest, f"images/{i:05d}.png")
        images[i] = np.asarray(Image.open(p))

    if manifest["kind"] == "synth":
        masks = np.zeros((n, IMG_SIZE, IMG_SIZE), dtype=np.uint8)
        for i in range(n):
            p = _load_verified(path, manifest, f"masks/{i:05d}.png")
            masks[i] = (np.asarray(Image.open(p)) > 127).astype(np.uint8)
        thetas = np.array(json.loads(_load_verified(path, manifest, "theta.json").read_text()),
                          dtype=np.float64).reshape(n, f.m)
        rotations = np.array(json.loads(_load_verified(path, manifest, "rotations.json").read_text()),
                             dtype=np.float64).reshape(n, 2)
        labels_raw = json.loads(_load_verified(path, manifest, "labels.json").read_text())
        labels = {k: np.asarray(v, dtype=np.int64) for k, v in labels_raw.items()}
        return SynthDatasetView(f, thetas, rotations, images, masks, labels, manifest)

    labels_raw = json.loads(_load_verified(path, manifest, "hidden/labels.json").read_text())
    rotations = np.array(json.loads(_load_verified(path, manifest, "hidden/rotations.json").read_text()),
                         dtype=np.float64).reshape(n, 2) if n else np.zeros((0, 2))
    labels = {k: np.asarray(v, dtype=np.int64) for k, v in labels_raw.items()}
    return RealDatasetView(f, images, labels, rotations, manifest)
