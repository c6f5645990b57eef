"""Experiment configuration: one TOML document, validated up front.

Sections mirror the object graph: [dataset], [split], [provider],
[balancing], [model], [train], [transforms], [run].  Scalar keys can be
overridden by environment variables named SGIA_<SECTION>_<KEY>
(e.g. SGIA_BALANCING_ALPHA=0.7, SGIA_TRAIN_EPOCHS=4).

Relative paths are resolved against the config file's directory.
Unknown sections or keys are rejected so typos fail before any compute.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .providers import TrajectoryConfig, available_providers
from .results import METHODS, SHOTS_REGIMES
from .sampler import MODES, BalancingConfig
from .training import TrainConfig
from .transforms import AUG_LEVELS, TransformSpec

_SECTIONS = ("dataset", "split", "provider", "balancing", "model", "train", "transforms", "run")

_DEFAULTS: dict[str, dict] = {
    "dataset": {"manifest": None, "image_root": None, "name": None},
    "split": {"source": None, "shots": "full", "seed": 0, "derive": False},
    "provider": {
        "provider": "toy-trajectory",
        "dump": None,
        "store": None,
        "m": 1,
        "k": 32,
        "base_seed": 0,
        "native_width": 64,
        "native_height": 48,
        "rotation_range": 12.0,
        "translation_range": 0.08,
        "scale_range": 0.10,
        "brightness_range": 0.15,
        "background_shift_range": 0.05,
    },
    "balancing": {"alpha": 0.5, "mode": "epoch-permutation"},
    "model": {"backbone": "cnn-small", "init_seed": 0, "checkpoint": None},
    "train": {
        "lr0": 0.01,
        "weight_decay": 1e-5,
        "momentum": 0.9,
        "batch_size": 16,
        "epochs": 128,
        "t0": 1,
        "t_mult": 2,
        "eval_every_epoch": True,
        "stage2_epochs": None,
    },
    "transforms": {"out_size": 224, "level": "RRC", "scale": [0.5, 1.0], "hflip": True},
    "run": {
        "method": "SGIA",
        "btl": True,
        "two_step": False,
        "seeds": [0],
        "output": "runs",
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """The validated object graph a command runs from."""

    manifest_path: Path
    image_root: Path | None
    dataset_name: str | None
    split_source: Path | None
    shots: str
    split_seed: int
    derive_split: bool
    provider_id: str
    dump_path: Path | None
    store_root: Path
    m: int
    k: int
    base_seed: int
    native_resolution: tuple[int, int]
    trajectory: TrajectoryConfig
    balancing: BalancingConfig
    backbone: str
    init_seed: int
    checkpoint: Path | None
    train: TrainConfig
    stage2: TrainConfig | None
    transforms: TransformSpec
    method: str
    btl: bool
    two_step: bool
    seeds: tuple[int, ...]
    output_dir: Path


def _coerce(raw: str, like) -> object:
    """Parse an env override to the type of the default it replaces."""
    if isinstance(like, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"cannot parse boolean from {raw!r}")
    if isinstance(like, int) and not isinstance(like, bool):
        return int(raw)
    if isinstance(like, float):
        return float(raw)
    return raw


def _apply_env(doc: dict, env) -> None:
    for section in _SECTIONS:
        for key, default in _DEFAULTS[section].items():
            var = f"SGIA_{section.upper()}_{key.upper()}"
            raw = env.get(var)
            if raw is None:
                continue
            like = doc.get(section, {}).get(key, default)
            if isinstance(like, (list, tuple)):
                raise ConfigError(f"{var}: list-valued keys cannot be overridden from the environment")
            if like is None:
                like = raw  # untyped optional: keep the string
            doc.setdefault(section, {})[key] = _coerce(raw, like)


def _check_unknown(doc: dict) -> None:
    for section in doc:
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]; expected one of {_SECTIONS}")
        extra = set(doc[section]) - set(_DEFAULTS[section])
        if extra:
            raise ConfigError(f"unknown key(s) in [{section}]: {sorted(extra)}")


def _merged(doc: dict, section: str) -> dict:
    out = dict(_DEFAULTS[section])
    out.update(doc.get(section, {}))
    return out


def load_experiment_config(path: str | Path, env=None) -> ExperimentConfig:
    """Parse, override, validate; raises ConfigError before any work starts."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        doc = tomllib.loads(p.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    _check_unknown(doc)
    _apply_env(doc, os.environ if env is None else env)

    base = p.parent

    def respath(value) -> Path | None:
        return None if value is None else (base / str(value)).resolve()

    dataset = _merged(doc, "dataset")
    if dataset["manifest"] is None:
        raise ConfigError("dataset.manifest is required")
    split = _merged(doc, "split")
    shots = str(split["shots"])
    if shots not in SHOTS_REGIMES:
        raise ConfigError(f"split.shots must be one of {SHOTS_REGIMES}, got {shots!r}")
    provider = _merged(doc, "provider")
    if provider["provider"] not in available_providers() and provider["dump"] is None:
        raise ConfigError(
            f"unknown provider {provider['provider']!r}; registered: {available_providers()}"
        )
    if provider["store"] is None:
        raise ConfigError("provider.store (the sequence store root) is required")
    balancing = _merged(doc, "balancing")
    if balancing["mode"] not in MODES:
        raise ConfigError(f"balancing.mode must be one of {MODES}, got {balancing['mode']!r}")
    model = _merged(doc, "model")
    train = _merged(doc, "train")
    transforms = _merged(doc, "transforms")
    if transforms["level"] not in AUG_LEVELS:
        raise ConfigError(f"transforms.level must be one of {AUG_LEVELS}, got {transforms['level']!r}")
    run = _merged(doc, "run")
    if run["method"] not in METHODS:
        raise ConfigError(f"run.method must be one of {METHODS}, got {run['method']!r}")
    seeds = tuple(int(s) for s in run["seeds"])
    if not seeds:
        raise ConfigError("run.seeds must be non-empty")

    trajectory = TrajectoryConfig(
        rotation_range=float(provider["rotation_range"]),
        translation_range=float(provider["translation_range"]),
        scale_range=float(provider["scale_range"]),
        brightness_range=float(provider["brightness_range"]),
        background_shift_range=float(provider["background_shift_range"]),
    )
    stage2_epochs = train.pop("stage2_epochs")
    train_cfg = TrainConfig(
        lr0=float(train["lr0"]),
        weight_decay=float(train["weight_decay"]),
        momentum=float(train["momentum"]),
        batch_size=int(train["batch_size"]),
        epochs=int(train["epochs"]),
        t0=int(train["t0"]),
        t_mult=int(train["t_mult"]),
        eval_every_epoch=bool(train["eval_every_epoch"]),
    )
    stage2_cfg = None
    if stage2_epochs is not None:
        stage2_cfg = TrainConfig(
            lr0=train_cfg.lr0,
            weight_decay=train_cfg.weight_decay,
            momentum=train_cfg.momentum,
            batch_size=train_cfg.batch_size,
            epochs=int(stage2_epochs),
            t0=train_cfg.t0,
            t_mult=train_cfg.t_mult,
            eval_every_epoch=train_cfg.eval_every_epoch,
        )

    scale = transforms["scale"]
    if not (isinstance(scale, (list, tuple)) and len(scale) == 2):
        raise ConfigError(f"transforms.scale must be a [lo, hi] pair, got {scale!r}")

    return ExperimentConfig(
        manifest_path=respath(dataset["manifest"]),
        image_root=respath(dataset["image_root"]),
        dataset_name=dataset["name"],
        split_source=respath(split["source"]),
        shots=shots,
        split_seed=int(split["seed"]),
        derive_split=bool(split["derive"]),
        provider_id=str(provider["provider"]),
        dump_path=respath(provider["dump"]),
        store_root=respath(provider["store"]),
        m=int(provider["m"]),
        k=int(provider["k"]),
        base_seed=int(provider["base_seed"]),
        native_resolution=(int(provider["native_width"]), int(provider["native_height"])),
        trajectory=trajectory,
        balancing=BalancingConfig(
            alpha=float(balancing["alpha"]),
            m=int(provider["m"]),
            k=int(provider["k"]),
            mode=str(balancing["mode"]),
        ),
        backbone=str(model["backbone"]),
        init_seed=int(model["init_seed"]),
        checkpoint=respath(model["checkpoint"]),
        train=train_cfg,
        stage2=stage2_cfg,
        transforms=TransformSpec(
            out_size=int(transforms["out_size"]),
            level=str(transforms["level"]),
            scale=(float(scale[0]), float(scale[1])),
            hflip=bool(transforms["hflip"]),
        ),
        method=str(run["method"]),
        btl=bool(run["btl"]),
        two_step=bool(run["two_step"]),
        seeds=seeds,
        output_dir=respath(run["output"]),
    )
