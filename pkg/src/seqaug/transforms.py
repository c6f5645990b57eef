"""Train and test image transforms.

Train pipeline (level "RRC"): random resized crop to S x S with an area
scale range, then random horizontal flip.  Level "None" keeps only the
flip and sizes the image with a plain full-image resize.  The test
pipeline is deterministic: resize the shorter side to round(8*S/7), then
center-crop S x S (256 -> 224 at the default size).

Crop dimensions are taken as ceil(sqrt(...)), so a draw at the full
image area can never produce a proper sub-crop: either it matches the
image aspect exactly (the crop is the whole image) or it overflows and
falls through to the full-image resize.  With scale=(1.0, 1.0) and the
flip disabled the train pipeline is therefore exactly the deterministic
resize, not just approximately.

Randomness comes from a caller-supplied SplitMix64, one stream per
sample, so transform draws never interleave across samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .images import center_crop, resize, resize_shorter_side, to_array
from .seeding import SplitMix64

AUG_LEVELS = ("None", "RRC")

_RRC_ATTEMPTS = 10
_LOG_ASPECT = (math.log(3.0 / 4.0), math.log(4.0 / 3.0))


@dataclass(frozen=True)
class TransformSpec:
    """Sizing and augmentation policy for one training run."""

    out_size: int = 224
    level: str = "RRC"
    scale: tuple[float, float] = (0.5, 1.0)
    hflip: bool = True

    def __post_init__(self):
        if self.out_size < 1:
            raise ConfigError(f"out_size must be >= 1, got {self.out_size}")
        if self.level not in AUG_LEVELS:
            raise ConfigError(f"level must be one of {AUG_LEVELS}, got {self.level!r}")
        lo, hi = self.scale
        if not 0.0 < lo <= hi <= 1.0:
            raise ConfigError(f"scale must satisfy 0 < lo <= hi <= 1, got {self.scale}")

    @property
    def test_resize(self) -> int:
        """Shorter-side target before the center crop, round(8*S/7)."""
        return round(8 * self.out_size / 7)


def sample_crop(width: int, height: int, spec: TransformSpec, rng: SplitMix64):
    """Draw a crop box (x0, y0, w, h), or None when all attempts overflow."""
    full = float(width * height)
    lo, hi = spec.scale
    for _ in range(_RRC_ATTEMPTS):
        area = full * rng.uniform(lo, hi)
        aspect = math.exp(rng.uniform(*_LOG_ASPECT))
        w = math.ceil(math.sqrt(area * aspect))
        h = math.ceil(math.sqrt(area / aspect))
        if w <= width and h <= height:
            x0 = rng.below(width - w + 1)
            y0 = rng.below(height - h + 1)
            return x0, y0, w, h
    return None


def _as_array(image) -> np.ndarray:
    return image if isinstance(image, np.ndarray) else to_array(image)


def train_transform(image, spec: TransformSpec, rng: SplitMix64) -> np.ndarray:
    """Augment one sample; returns uint8 HWC at out_size x out_size."""
    arr = _as_array(image)
    height, width = arr.shape[:2]
    out = (spec.out_size, spec.out_size)
    if spec.level == "RRC":
        box = sample_crop(width, height, spec, rng)
        if box is None:
            arr = resize(arr, out)
        else:
            x0, y0, w, h = box
            arr = resize(arr[y0 : y0 + h, x0 : x0 + w], out)
    else:
        arr = resize(arr, out)
    if spec.hflip and rng.random() < 0.5:
        arr = arr[:, ::-1].copy()
    return arr


def test_transform(image, spec: TransformSpec) -> np.ndarray:
    """Deterministic evaluation sizing: shorter side to round(8*S/7), center crop."""
    arr = resize_shorter_side(_as_array(image), spec.test_resize)
    return center_crop(arr, spec.out_size)
