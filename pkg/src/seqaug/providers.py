"""Generation providers: one image in, K label-preserving frames out.

A provider is anything that implements ``generate(image, k, seed)`` and
returns exactly K frames at its native resolution.  The shipped toy
provider sweeps a parametric camera/lighting trajectory: endpoint
parameters are drawn from the configured ranges with a seeded stream,
then interpolated linearly across the K frames, so frame geometry never
changes the class of the depicted object and every sequence can be
recomputed from its seed alone.

Providers register by id; config files select one with ``provider = "<id>"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from PIL import Image

from .errors import ConfigError, ProviderError
from .images import resize, to_image
from .seeding import SplitMix64, mix

# tag separating trajectory endpoint draws from other streams keyed on the same seed
_TRAJ_TAG = 0x72616A


@dataclass(frozen=True)
class TrajectoryConfig:
    """Half-width amplitudes for the toy trajectory; all default to identity.

    rotation_range        degrees, rotation angle in [-r, r]
    translation_range     fraction of image extent per axis, in [-t, t]
    scale_range           log-amplitude; zoom factor is exp(u), u in [-s, s]
    brightness_range      log-amplitude; gain is exp(u), u in [-b, b]
    background_shift_range  hue offset as a fraction of the hue circle, in [-h, h]
    """

    rotation_range: float = 0.0
    translation_range: float = 0.0
    scale_range: float = 0.0
    brightness_range: float = 0.0
    background_shift_range: float = 0.0

    def __post_init__(self):
        for name in (
            "rotation_range",
            "translation_range",
            "scale_range",
            "brightness_range",
            "background_shift_range",
        ):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ConfigError(f"{name} must be a finite non-negative amplitude, got {v}")

    @property
    def is_identity(self) -> bool:
        return (
            self.rotation_range == 0
            and self.translation_range == 0
            and self.scale_range == 0
            and self.brightness_range == 0
            and self.background_shift_range == 0
        )

    def amplitudes(self) -> tuple[float, ...]:
        """Per-parameter half widths in draw order (see draw_endpoints)."""
        return (
            self.rotation_range,
            self.translation_range,
            self.translation_range,
            self.scale_range,
            self.brightness_range,
            self.background_shift_range,
        )


# parameter vector layout: (angle_deg, tx, ty, log_scale, log_gain, hue_shift)
PARAM_NAMES = ("angle_deg", "tx", "ty", "log_scale", "log_gain", "hue_shift")


def draw_endpoints(config: TrajectoryConfig, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded endpoint draw.

    Stream is SplitMix64(mix(seed, _TRAJ_TAG)); draws come parameter-major,
    start before end: angle_s, angle_e, tx_s, tx_e, ty_s, ty_e, scale_s,
    scale_e, gain_s, gain_e, hue_s, hue_e.
    """
    rng = SplitMix64(mix(seed, _TRAJ_TAG))
    start = np.zeros(6)
    end = np.zeros(6)
    for p, amp in enumerate(config.amplitudes()):
        start[p] = rng.uniform(-amp, amp)
        end[p] = rng.uniform(-amp, amp)
    return start, end


def trajectory_params(config: TrajectoryConfig, k: int, seed: int) -> np.ndarray:
    """(K, 6) per-frame parameters; frame t sits at fraction t/(K-1) between
    the drawn endpoints (K=1 collapses to the start pose)."""
    if k < 1:
        raise ConfigError(f"K must be >= 1, got {k}")
    start, end = draw_endpoints(config, seed)
    if k == 1:
        return start[None, :].copy()
    frac = np.arange(k, dtype=np.float64)[:, None] / (k - 1)
    return start[None, :] + frac * (end - start)[None, :]


def _warp_affine(arr: np.ndarray, angle_deg: float, tx: float, ty: float, scale: float) -> np.ndarray:
    """Rotate/scale about the image center, then translate by a fraction of extent."""
    h, w = arr.shape[:2]
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    dx, dy = tx * w, ty * h
    theta = np.deg2rad(angle_deg)
    cos_t, sin_t = np.cos(theta) / scale, np.sin(theta) / scale
    # inverse map: output pixel (x, y) samples input at R(-theta)/s @ (p - c - d) + c
    a, b = cos_t, sin_t
    d, e = -sin_t, cos_t
    c = cx - a * (cx + dx) - b * (cy + dy)
    f = cy - d * (cx + dx) - e * (cy + dy)
    out = to_image(arr).transform(
        (w, h), Image.Transform.AFFINE, (a, b, c, d, e, f),
        resample=Image.Resampling.BILINEAR, fillcolor=(0, 0, 0),
    )
    return np.asarray(out, dtype=np.uint8)


def _shift_hue(arr: np.ndarray, offset: float) -> np.ndarray:
    hsv = np.asarray(to_image(arr).convert("HSV"), dtype=np.uint8).copy()
    shift = int(round(offset * 256.0)) % 256
    hsv[..., 0] = (hsv[..., 0].astype(np.int32) + shift).astype(np.uint8)
    out = Image.fromarray(hsv, mode="HSV").convert("RGB")
    return np.asarray(out, dtype=np.uint8)


def render_frame(base: np.ndarray, params: np.ndarray) -> np.ndarray:
    """Apply one parameter vector to the (already resized) base image."""
    angle, tx, ty, log_scale, log_gain, hue = (float(v) for v in params)
    if angle == tx == ty == log_scale == log_gain == hue == 0.0:
        return base.copy()
    out = base
    if angle != 0.0 or tx != 0.0 or ty != 0.0 or log_scale != 0.0:
        out = _warp_affine(out, angle, tx, ty, float(np.exp(log_scale)))
    if log_gain != 0.0:
        gain = float(np.exp(log_gain))
        out = np.clip(np.rint(out.astype(np.float64) * gain), 0, 255).astype(np.uint8)
    if hue != 0.0:
        out = _shift_hue(out, hue)
    return out


class GenerationProvider:
    """Contract every augmentation backend satisfies."""

    provider_id: str = "abstract"
    native_resolution: tuple[int, int] = (0, 0)  # (width, height)
    deterministic: bool = True

    def generate(self, image: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
        raise NotImplementedError

    def meta(self) -> dict:
        """Provider configuration echoed verbatim into store meta."""
        return {"provider_id": self.provider_id, "native_resolution": list(self.native_resolution)}


class ToyTrajectoryProvider(GenerationProvider):
    """Desk-scale stand-in generator: affine + photometric sweeps."""

    deterministic = True

    def __init__(
        self,
        config: TrajectoryConfig | None = None,
        native_resolution: tuple[int, int] = (64, 48),
        provider_id: str = "toy-trajectory",
    ):
        if min(native_resolution) < 1:
            raise ConfigError(f"native_resolution must be positive, got {native_resolution}")
        self.config = config or TrajectoryConfig()
        self.native_resolution = (int(native_resolution[0]), int(native_resolution[1]))
        self.provider_id = provider_id

    def generate(self, image: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
        base = resize(image, self.native_resolution)
        params = trajectory_params(self.config, k, seed)
        return [render_frame(base, params[t]) for t in range(k)]

    def meta(self) -> dict:
        doc = super().meta()
        doc["trajectory"] = {name: getattr(self.config, name) for name in (
            "rotation_range", "translation_range", "scale_range",
            "brightness_range", "background_shift_range",
        )}
        return doc


@dataclass(frozen=True)
class GeneratedSequence:
    """K frames plus the seed that produced them."""

    frames: tuple[np.ndarray, ...]
    seed: int
    provider_id: str

    def __len__(self) -> int:
        return len(self.frames)


def generate_sequence(
    provider: GenerationProvider, image: np.ndarray, k: int, seed: int
) -> GeneratedSequence:
    """Run a provider and tag the output with its seed; failures carry both."""
    if k < 1:
        raise ConfigError(f"K must be >= 1, got {k}")
    try:
        frames = provider.generate(image, k, seed)
    except ProviderError:
        raise
    except Exception as e:
        raise ProviderError(
            f"provider {provider.provider_id!r} failed with seed {seed}: {e}",
            provider_id=provider.provider_id,
            seed=seed,
        ) from e
    if len(frames) != k:
        raise ProviderError(
            f"provider {provider.provider_id!r} returned {len(frames)} frames, expected {k}",
            provider_id=provider.provider_id,
            seed=seed,
        )
    return GeneratedSequence(frames=tuple(frames), seed=seed, provider_id=provider.provider_id)


# -- registry ---------------------------------------------------------------

_REGISTRY: dict[str, Callable[..., GenerationProvider]] = {}


def register_provider(provider_id: str, factory: Callable[..., GenerationProvider]) -> None:
    if provider_id in _REGISTRY:
        raise ConfigError(f"provider {provider_id!r} already registered")
    _REGISTRY[provider_id] = factory


def available_providers() -> list[str]:
    return sorted(_REGISTRY)


def make_provider(provider_id: str, **options) -> GenerationProvider:
    if provider_id not in _REGISTRY:
        raise ConfigError(
            f"unknown provider {provider_id!r}; available: {', '.join(available_providers())}"
        )
    return _REGISTRY[provider_id](**options)


def _toy_factory(
    trajectory: dict | TrajectoryConfig | None = None,
    native_resolution: Sequence[int] = (64, 48),
    **_ignored,
) -> ToyTrajectoryProvider:
    if isinstance(trajectory, dict):
        trajectory = TrajectoryConfig(**trajectory)
    return ToyTrajectoryProvider(
        config=trajectory, native_resolution=(int(native_resolution[0]), int(native_resolution[1]))
    )


register_provider("toy-trajectory", _toy_factory)
