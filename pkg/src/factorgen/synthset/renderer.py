"""Procedural 2.5D face-sprite renderer with exact ground truth.

Every image is a pure function of (theta, rotation): a layered 64x64 sprite
with an ellipsoidal head under yaw/pitch foreshortening, gaze-steerable iris
disks (the eye-mask source), a continuously parameterized mouth, a parametric
hair region, directional shading and a flat gradient background.

Mirror exactness matters for tests: every horizontally asymmetric term enters
through a factor that is exactly 0.0 at the symmetric setting (sin(0), or
p - 0.5 with p = 0.5), so a frontal symmetric theta renders to an image equal
to its own horizontal mirror to the last bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..factorization import Factorization, FactorizationError, ThetaVector

RENDERER_VERSION = "sprite-renderer/1"
IMG_SIZE = 64

# pixel grid centred between the two middle pixels so x -> 63-x mirrors dx -> -dx
_COORD = (np.arange(IMG_SIZE, dtype=np.float64) - (IMG_SIZE - 1) / 2.0)
_DX = _COORD[None, :] * np.ones((IMG_SIZE, 1))
_DY = _COORD[:, None] * np.ones((1, IMG_SIZE))

_IRIS_COLORS = np.array(
    [
        [0.45, 0.28, 0.14],  # brown
        [0.25, 0.42, 0.62],  # blue
        [0.27, 0.48, 0.30],  # green
    ]
)
_SKIN = np.array([0.92, 0.76, 0.66])
_LIP = np.array([0.70, 0.32, 0.30])
_CAVITY = np.array([0.20, 0.07, 0.07])
_BROW_DARKEN = 0.72

LABEL_THRESHOLDS: dict[str, dict] = {
    "mouth_open": {"factor": "expression", "index": 0, "op": ">", "value": 0.6},
    "smile": {"factor": "expression", "index": 1, "op": ">", "value": 0.6},
    "brow_raise": {"factor": "expression", "index": 2, "op": ">", "value": 0.6},
    "dark_hair": {"factor": "hair_color", "index": 0, "op": ">", "value": 0.6},
    "gray_hair": {"factor": "hair_color", "index": 1, "op": ">", "value": 0.6},
    "red_hair": {"factor": "hair_color", "index": 2, "op": ">", "value": 0.6},
    "long_hair": {"factor": "hair_style", "index": 0, "op": ">", "value": 0.6},
    "bright_bg": {"factor": "background", "index": 1, "op": ">", "value": 0.6},
    "blue_eyes": {"factor": "eye_color", "index": 1, "op": "argmax", "value": None},
    "lit_left": {"factor": "illumination", "index": 0, "op": "<", "value": 0.35},
}

LABEL_NAMES = tuple(LABEL_THRESHOLDS)


class RenderError(ValueError):
    pass


@dataclass
class SynthSample:
    theta: ThetaVector
    rotation: tuple[float, float]
    image: np.ndarray          # (64, 64, 3) float32 in [-1, 1]
    eye_mask: np.ndarray       # (64, 64) uint8 in {0, 1}
    labels: dict[str, int]


class RealSample:
    """A real-domain image whose ground truth is hidden from training code.

    The trainer may only read ``image``. Evaluation tooling goes through
    ``hidden_labels()`` / ``hidden_rotation()``, which bump a module-wide
    access counter so tests can prove the training path never peeked.
    """

    hidden_access_count: int = 0

    def __init__(self, image: np.ndarray, hidden_labels: dict[str, int],
                 hidden_rotation: tuple[float, float]):
        self.image = image
        self._hidden_labels = dict(hidden_labels)
        self._hidden_rotation = tuple(hidden_rotation)

    def hidden_labels(self) -> dict[str, int]:
        RealSample.hidden_access_count += 1
        return dict(self._hidden_labels)

    def hidden_rotation(self) -> tuple[float, float]:
        RealSample.hidden_access_count += 1
        return self._hidden_rotation


def labels_for(theta: ThetaVector) -> dict[str, int]:
    """Attribute labels as fixed thresholds on theta components."""
    out = {}
    for name, rule in LABEL_THRESHOLDS.items():
        part = theta.part(rule["factor"])
        if rule["op"] == "argmax":
            out[name] = int(int(np.argmax(part)) == rule["index"])
        elif rule["op"] == ">":
            out[name] = int(part[rule["index"]] > rule["value"])
        else:
            out[name] = int(part[rule["index"]] < rule["value"])
    return out


def _soft(q: np.ndarray, sharp: float = 3.0) -> np.ndarray:
    """Soft inside-ness of a quadratic form: 1 well inside q<1, 0 outside."""
    return np.clip((1.0 - q) * sharp, 0.0, 1.0)


def _hue_rgb(h: float) -> np.ndarray:
    ang = 2.0 * np.pi * h
    return np.array(
        [
            0.5 + 0.45 * np.cos(ang),
            0.5 + 0.45 * np.cos(ang - 2.0 * np.pi / 3.0),
            0.5 + 0.45 * np.cos(ang - 4.0 * np.pi / 3.0),
        ]
    )


def _geometry(theta: ThetaVector, rotation: tuple[float, float]) -> dict:
    f = theta.factorization
    yaw_lim, pitch_lim = f.rotation_limits_deg
    yaw, pitch = float(rotation[0]), float(rotation[1])
    if abs(yaw) > yaw_lim + 1e-9 or abs(pitch) > pitch_lim + 1e-9:
        raise RenderError(
            f"rotation {rotation} outside limits (±{yaw_lim}, ±{pitch_lim})"
        )
    head = theta.part("head_shape")
    yaw_r, pitch_r = np.radians(yaw), np.radians(pitch)
    g = {}
    g["yaw_r"], g["pitch_r"] = yaw_r, pitch_r
    g["fx"] = np.sin(yaw_r) * 7.5          # feature-plane horizontal shift
    g["fy"] = np.sin(pitch_r) * 5.5        # feature-plane vertical shift
    g["hx"] = np.sin(yaw_r) * 2.5          # head outline shift
    g["hy"] = np.sin(pitch_r) * 1.8
    g["a"] = (13.0 + 6.0 * head[0]) * (0.82 + 0.18 * np.cos(yaw_r))
    g["b"] = (16.0 + 5.0 * head[1]) * (0.86 + 0.14 * np.cos(pitch_r))
    g["chin"], g["cheek"] = head[2], head[3]
    g["cy"] = 2.0 + g["hy"]
    return g


def _face_halfwidth(g: dict, y_hat: np.ndarray) -> np.ndarray:
    """Half-width of the face at normalized row position y_hat in [-1, 1]."""
    taper = 1.0 - 0.33 * g["chin"] * np.clip(y_hat, 0.0, None) ** 1.5
    bulge = 1.0 + 0.10 * g["cheek"] * np.clip(1.0 - y_hat ** 2, 0.0, None)
    return g["a"] * taper * bulge


def render(theta: ThetaVector, rotation: tuple[float, float]) -> SynthSample:
    """Deterministically rasterize theta at the given head rotation."""
    g = _geometry(theta, rotation)
    f = theta.factorization
    expr = theta.part("expression")
    eye_onehot = theta.part("eye_color")
    gaze = theta.part("eye_rotation")
    hair_c = theta.part("hair_color")
    hair_s = theta.part("hair_style")
    ill = theta.part("illumination")
    bg = theta.part("background")

    dx, dy = _DX, _DY
    cy, a, b = g["cy"], g["a"], g["b"]
    y_hat = np.clip((dy - cy) / b, -1.3, 1.3)
    half_w = _face_halfwidth(g, y_hat)
    q_face = ((dx - g["hx"]) / half_w) ** 2 + ((dy - cy) / b) ** 2
    face_alpha = _soft(q_face)

    # directional illumination; azimuth term vanishes exactly at ill[0] = 0.5
    az = (ill[0] - 0.5) * np.pi
    elv = 0.15 + 0.75 * ill[1]
    lx = np.sin(az) * np.cos(elv)
    ly = -np.sin(elv)
    lz = np.cos(az) * np.cos(elv)
    nx = (dx - g["hx"]) / (half_w * 0.9)
    ny = (dy - cy) / (b * 0.9)
    nz = np.sqrt(np.clip(1.0 - np.clip(nx ** 2 + ny ** 2, 0.0, 1.0), 0.0, 1.0)) + 0.35
    norm = np.sqrt(nx ** 2 + ny ** 2 + nz ** 2)
    diffuse = np.clip((nx * lx + ny * ly + nz * lz) / norm, 0.0, None)
    intensity = 0.55 + 0.65 * ill[2]
    shade = intensity * (0.58 + 0.58 * diffuse)

    # background: vertical gradient, horizontally uniform
    bg_col = 0.55 * _hue_rgb(bg[0]) + 0.45 * 0.5
    bg_level = (0.30 + 0.65 * bg[1]) * (1.0 - 0.18 * (dy - _COORD[0]) / (IMG_SIZE - 1))
    img = bg_level[:, :, None] * bg_col[None, None, :]

    def blend(alpha: np.ndarray, color: np.ndarray):
        nonlocal img
        img = img * (1.0 - alpha[:, :, None]) + alpha[:, :, None] * color

    # face
    skin = _SKIN[None, None, :] * shade[:, :, None]
    blend(face_alpha, skin)

    # eyes
    ex_off = 0.42 * a
    ey = cy - 0.20 * b + g["fy"] * 0.8
    ew = 0.20 * a
    eh = 0.12 * b
    gaze_dx = np.sin(np.radians(gaze[0])) * ew * 0.75
    gaze_dy = np.sin(np.radians(gaze[1])) * eh * 0.75
    iris_col = _IRIS_COLORS.T @ eye_onehot
    iris_r = 0.60 * eh
    eye_mask = np.zeros((IMG_SIZE, IMG_SIZE), dtype=bool)
    for side in (-1.0, 1.0):
        ex = g["fx"] + side * ex_off
        q_sclera = ((dx - ex) / ew) ** 2 + ((dy - ey) / eh) ** 2
        sclera_alpha = _soft(q_sclera) * face_alpha
        blend(sclera_alpha, np.array([0.97, 0.97, 0.95])[None, None, :] * shade[:, :, None])
        q_iris = ((dx - ex - gaze_dx) ** 2 + (dy - ey - gaze_dy) ** 2) / iris_r ** 2
        iris_alpha = _soft(q_iris) * (q_sclera < 1.0) * face_alpha
        blend(iris_alpha, iris_col[None, None, :] * (0.4 + 0.6 * shade[:, :, None]))
        q_pupil = ((dx - ex - gaze_dx) ** 2 + (dy - ey - gaze_dy) ** 2) / (0.45 * iris_r) ** 2
        blend(_soft(q_pupil) * (q_sclera < 1.0) * face_alpha, np.array([0.06, 0.05, 0.05]))
        eye_mask |= (iris_alpha > 0.5)

    # brows
    brow_lift = 2.6 * expr[2]
    by = ey - eh * 2.1 - brow_lift
    bw = ew * 1.25
    for side in (-1.0, 1.0):
        ex = g["fx"] + side * ex_off
        u = (dx - ex) / bw
        arch = -1.1 * np.clip(1.0 - u ** 2, 0.0, None)
        d_brow = np.abs(dy - (by + arch))
        brow_alpha = np.clip(1.4 - d_brow, 0.0, 1.0) * (np.abs(u) < 1.0) * face_alpha
        blend(brow_alpha * 0.85, skin * (1.0 - _BROW_DARKEN) + 0.0)

    # mouth
    mx = g["fx"] * 1.1
    my = cy + 0.47 * b + g["fy"] * 0.6
    mw = 0.30 * a
    cs = (expr[1] - 0.5) * 2.0
    u = (dx - mx) / mw
    inside_u = np.abs(u) < 1.0
    y_c = my + cs * 3.0 * (0.4 - u ** 2)
    h_open = 0.8 + 5.4 * expr[0]
    profile = np.sqrt(np.clip(1.0 - u ** 2, 0.0, None))
    d_mouth = np.abs(dy - y_c)
    lip_alpha = np.clip((h_open / 2.0 + 1.2) * profile - d_mouth, 0.0, 1.0) * inside_u * face_alpha
    blend(lip_alpha, _LIP[None, None, :] * shade[:, :, None])
    cav_alpha = np.clip((h_open / 2.0 - 0.9) * profile - d_mouth, 0.0, 1.0) * inside_u * face_alpha
    blend(cav_alpha, _CAVITY[None, None, :] * (0.5 + 0.5 * shade[:, :, None]))

    # hair: fringe over the forehead plus side strands, drawn on top
    q_outer = ((dx - g["hx"]) / (a * 1.17)) ** 2 + ((dy - (cy - 1.0)) / (b * 1.13)) ** 2
    outer_alpha = _soft(q_outer)
    y_fringe = cy - b * (0.95 - 0.42 * hair_s[1])
    y_len = cy + b * (0.05 + 1.05 * hair_s[0])
    side_band = (np.abs(dx - g["hx"]) >= 0.76 * half_w) & (dy <= y_len)
    fringe_band = dy <= y_fringe
    hair_alpha = outer_alpha * (fringe_band | side_band)
    v = 0.10 + 0.72 * (1.0 - hair_c[0])
    base = np.array([v, v * 0.80, v * 0.58])
    base = base + hair_c[2] * np.array([0.30, 0.02, -0.02]) * (0.35 + 0.65 * (1.0 - hair_c[0]))
    gray_target = np.full(3, 0.40 + 0.45 * (1.0 - 0.5 * hair_c[0]))
    hair_rgb = (1.0 - 0.85 * hair_c[1]) * base + 0.85 * hair_c[1] * gray_target
    hair_rgb = np.clip(hair_rgb, 0.0, 1.0)
    blend(hair_alpha, hair_rgb[None, None, :] * (0.55 + 0.45 * shade[:, :, None]))

    img = np.clip(img, 0.0, 1.0) * 2.0 - 1.0
    return SynthSample(
        theta=theta,
        rotation=(float(rotation[0]), float(rotation[1])),
        image=img.astype(np.float32),
        eye_mask=eye_mask.astype(np.uint8),
        labels=labels_for(theta),
    )


def region_masks(theta: ThetaVector, rotation: tuple[float, float]) -> dict[str, np.ndarray]:
    """Declared pixel regions for oracle tests.

    ``mouth`` is a conservative superset of every pixel the mouth can touch
    for any mouth-opening value (other components fixed). ``hair`` is the
    exact set of pixels the hair layer writes, which is invariant to
    hair_color by construction.
    """
    g = _geometry(theta, rotation)
    expr = theta.part("expression")
    hair_s = theta.part("hair_style")
    dx, dy = _DX, _DY
    cy, a, b = g["cy"], g["a"], g["b"]
    y_hat = np.clip((dy - cy) / b, -1.3, 1.3)
    half_w = _face_halfwidth(g, y_hat)
    q_face = ((dx - g["hx"]) / half_w) ** 2 + ((dy - cy) / b) ** 2
    face = q_face < 1.0 + 1.0 / 3.0  # soft edge reaches alpha 0 at q = 1 + 1/sharp

    mx = g["fx"] * 1.1
    my = cy + 0.47 * b + g["fy"] * 0.6
    mw = 0.30 * a
    cs = abs((expr[1] - 0.5) * 2.0)
    h_max = (0.8 + 5.4) / 2.0 + 1.2
    pad = 1.5
    y_reach = h_max + 3.0 * cs * 1.0
    mouth = (
        (np.abs(dx - mx) <= mw + pad)
        & (dy >= my - y_reach - pad)
        & (dy <= my + y_reach + pad)
    )

    q_outer = ((dx - g["hx"]) / (a * 1.17)) ** 2 + ((dy - (cy - 1.0)) / (b * 1.13)) ** 2
    outer = (1.0 - q_outer) * 3.0 > 0.0
    y_fringe = cy - b * (0.95 - 0.42 * hair_s[1])
    y_len = cy + b * (0.05 + 1.05 * hair_s[0])
    side_band = (np.abs(dx - g["hx"]) >= 0.76 * half_w) & (dy <= y_len)
    hair = outer & ((dy <= y_fringe) | side_band)

    ex_off = 0.42 * a
    ey = cy - 0.20 * b + g["fy"] * 0.8
    ew, eh = 0.20 * a, 0.12 * b
    eyes = np.zeros_like(face)
    for side in (-1.0, 1.0):
        ex = g["fx"] + side * ex_off
        eyes |= (np.abs(dx - ex) <= ew + 1.5) & (np.abs(dy - ey) <= eh + 1.5)

    return {
        "face": face,
        "mouth": mouth,
        "hair": hair,
        "eyes": eyes,
        "background": ~(face | hair),
    }
