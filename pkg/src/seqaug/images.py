"""Image I/O and geometry helpers (uint8 HWC RGB arrays everywhere).

Resolution tuples follow the (width, height) convention; numpy arrays
are (height, width, 3).  PNG is used for anything written to disk so
round trips are pixel-exact.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import StoreError


def to_array(img: Image.Image) -> np.ndarray:
    return np.asarray(img.convert("RGB"), dtype=np.uint8)


def to_image(arr: np.ndarray) -> Image.Image:
    if arr.dtype != np.uint8 or arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected uint8 HxWx3 array, got {arr.dtype} {arr.shape}")
    return Image.fromarray(arr, mode="RGB")


def load_image(path: str | Path) -> np.ndarray:
    p = Path(path)
    if not p.is_file():
        raise StoreError(f"image file not found: {p}")
    with Image.open(p) as img:
        return to_array(img)


def save_png(arr: np.ndarray, path: str | Path) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    to_image(arr).save(p, format="PNG")


def resolution_of(arr: np.ndarray) -> tuple[int, int]:
    """(width, height) of an HWC array."""
    return arr.shape[1], arr.shape[0]


def resize(arr: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    """Bilinear resize to (width, height); identity sizes return a copy."""
    w, h = size
    if (w, h) == resolution_of(arr):
        return arr.copy()
    out = to_image(arr).resize((w, h), Image.Resampling.BILINEAR)
    return np.asarray(out, dtype=np.uint8)


def resize_shorter_side(arr: np.ndarray, target: int) -> np.ndarray:
    """Scale so the shorter side equals `target`, preserving aspect ratio."""
    w, h = resolution_of(arr)
    if w <= h:
        new_w, new_h = target, max(1, round(h * target / w))
    else:
        new_w, new_h = max(1, round(w * target / h)), target
    return resize(arr, (new_w, new_h))


def center_crop(arr: np.ndarray, size: int) -> np.ndarray:
    h, w = arr.shape[:2]
    if size > h or size > w:
        raise ValueError(f"crop {size} exceeds image {w}x{h}")
    top = (h - size) // 2
    left = (w - size) // 2
    return arr[top : top + size, left : left + size].copy()
