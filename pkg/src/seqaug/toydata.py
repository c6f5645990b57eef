"""Rendered glyph dataset for end-to-end studies.

Ten shape classes drawn analytically (supersampled masks, so any pose
renders cleanly).  Every glyph is mirror-symmetric about the vertical
axis, which keeps horizontal flips label-safe, and the class set stays
separable under rotations up to ~30 degrees (no pair of classes is a
rotation of another).

The intended study shape: train images in a canonical pose with barely
any jitter, test images with pose and lighting variation, and a
trajectory provider configured to span that same variation.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .images import save_png
from .manifest import DatasetManifest, ImageRecord, save_manifest
from .providers import TrajectoryConfig
from .seeding import SplitMix64, mix
from .splits import SplitSpec, save_split

_SUPER = 4  # supersampling factor for antialiased masks

_BG = np.array([40.0, 44.0, 48.0])
_FG = np.array([235.0, 233.0, 226.0])

_TAG_TRAIN = 0x7261
_TAG_TEST = 0x7465


def _mask_disk(x, y):
    return x * x + y * y <= 0.58**2


def _mask_ring(x, y):
    r2 = x * x + y * y
    return (r2 <= 0.60**2) & (r2 >= 0.36**2)


def _mask_square(x, y):
    return np.maximum(np.abs(x), np.abs(y)) <= 0.52


def _mask_triangle(x, y):
    return (y >= -0.50) & (y <= 0.62) & (np.abs(x) <= (0.62 - y) * (0.58 / 1.12))


def _mask_star(x, y):
    phi = np.degrees(np.arctan2(x, y)) % 72.0
    a = np.minimum(phi, 72.0 - phi) / 36.0
    radius = 0.66 + (0.26 - 0.66) * a
    return x * x + y * y <= radius * radius


def _mask_plus(x, y):
    ax, ay = np.abs(x), np.abs(y)
    return ((ax <= 0.17) & (ay <= 0.60)) | ((ay <= 0.17) & (ax <= 0.60))


def _mask_hbars(x, y):
    return (np.abs(x) <= 0.55) & ((np.abs(y - 0.27) <= 0.12) | (np.abs(y + 0.27) <= 0.12))


def _mask_tee(x, y):
    bar = (np.abs(x) <= 0.55) & (y >= 0.33) & (y <= 0.60)
    stem = (np.abs(x) <= 0.14) & (y >= -0.60) & (y <= 0.33)
    return bar | stem


def _mask_crescent(x, y):
    return (x * x + y * y <= 0.60**2) & (x * x + (y - 0.28) ** 2 > 0.47**2)


def _mask_twodots(x, y):
    top = x * x + (y - 0.33) ** 2 <= 0.22**2
    bottom = x * x + (y + 0.33) ** 2 <= 0.22**2
    return top | bottom


GLYPHS = (
    ("disk", _mask_disk),
    ("ring", _mask_ring),
    ("square", _mask_square),
    ("triangle", _mask_triangle),
    ("star", _mask_star),
    ("plus", _mask_plus),
    ("hbars", _mask_hbars),
    ("tee", _mask_tee),
    ("crescent", _mask_crescent),
    ("twodots", _mask_twodots),
)

CLASS_COUNT = len(GLYPHS)


def render_glyph(
    class_id: int,
    size: int = 48,
    rotation: float = 0.0,
    translate: tuple[float, float] = (0.0, 0.0),
    scale: float = 1.0,
    gain: float = 1.0,
) -> np.ndarray:
    """Draw one glyph at the given pose; returns uint8 HWC.

    rotation is in degrees, translate in fractions of the half-extent,
    scale multiplies glyph size, gain multiplies final intensity.
    """
    if not 0 <= class_id < CLASS_COUNT:
        raise ValueError(f"class_id must be in 0..{CLASS_COUNT - 1}, got {class_id}")
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    n = size * _SUPER
    coords = (np.arange(n) + 0.5) / n * 2.0 - 1.0
    px, py_down = np.meshgrid(coords, coords)
    py = -py_down  # mask functions use y pointing up

    # inverse pose map: image point -> glyph coordinates
    theta = math.radians(rotation)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    ux = (px - translate[0]) / scale
    uy = (py + translate[1]) / scale
    gx = cos_t * ux + sin_t * uy
    gy = -sin_t * ux + cos_t * uy

    mask = GLYPHS[class_id][1](gx, gy).astype(np.float64)
    alpha = mask.reshape(size, _SUPER, size, _SUPER).mean(axis=(1, 3))

    rgb = _BG[None, None, :] + alpha[:, :, None] * (_FG - _BG)[None, None, :]
    return np.clip(np.rint(rgb * gain), 0, 255).astype(np.uint8)


# -- pose sampling ------------------------------------------------------------


def _pose(rng: SplitMix64, rot: float, trans: float, log_scale: float, log_gain: float):
    return {
        "rotation": rng.uniform(-rot, rot),
        "translate": (rng.uniform(-trans, trans), rng.uniform(-trans, trans)),
        "scale": math.exp(rng.uniform(-log_scale, log_scale)),
        "gain": math.exp(rng.uniform(-log_gain, log_gain)),
    }


# canonical-pose jitter (train split) and the held-out variation (test split)
TRAIN_POSE = dict(rot=3.0, trans=0.02, log_scale=0.03, log_gain=0.05)
TEST_POSE = dict(rot=30.0, trans=0.12, log_scale=0.12, log_gain=0.25)


def study_trajectory_config() -> TrajectoryConfig:
    """Provider amplitudes covering the test-split pose/lighting variation."""
    return TrajectoryConfig(
        rotation_range=30.0,
        translation_range=0.12,
        scale_range=0.12,
        brightness_range=0.25,
        background_shift_range=0.08,
    )


def build_toy_dataset(
    root: str | Path,
    train_per_class: int = 5,
    test_per_class: int = 20,
    size: int = 48,
    seed: int = 0,
) -> tuple[Path, Path]:
    """Render the glyph corpus; returns (manifest path, split path).

    Ids are dense: train images first (class-major), then test images.
    """
    root = Path(root)
    records = []
    train_ids: list[int] = []
    test_ids: list[int] = []

    next_id = 1  # manifest ids are dense and 1-based
    for cls, (name, _) in enumerate(GLYPHS):
        for idx in range(train_per_class):
            rng = SplitMix64(mix(seed, _TAG_TRAIN, cls, idx))
            arr = render_glyph(cls, size=size, **_pose(rng, **TRAIN_POSE))
            rel = Path("images") / name / f"train_{idx:03d}.png"
            save_png(arr, root / rel)
            records.append(ImageRecord(id=next_id, path=str(rel), label=cls, width=size, height=size))
            train_ids.append(next_id)
            next_id += 1
    for cls, (name, _) in enumerate(GLYPHS):
        for idx in range(test_per_class):
            rng = SplitMix64(mix(seed, _TAG_TEST, cls, idx))
            arr = render_glyph(cls, size=size, **_pose(rng, **TEST_POSE))
            rel = Path("images") / name / f"test_{idx:03d}.png"
            save_png(arr, root / rel)
            records.append(ImageRecord(id=next_id, path=str(rel), label=cls, width=size, height=size))
            test_ids.append(next_id)
            next_id += 1

    manifest = DatasetManifest(name="toy-glyphs", class_count=CLASS_COUNT, records=tuple(records))
    manifest_path = root / "manifest.tsv"
    save_manifest(manifest, manifest_path)

    split = SplitSpec(
        train_ids=tuple(train_ids),
        test_ids=tuple(test_ids),
        shots_per_class=train_per_class,
        seed=seed,
    )
    split_path = root / "split.txt"
    save_split(split, split_path)
    return manifest_path, split_path
