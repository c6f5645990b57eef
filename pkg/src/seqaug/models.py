"""Classifier backbones in plain numpy with explicit backprop.

A model is a list of layers ending in a Linear named "head" whose width
equals the class count.  Desk-scale CNN backbones are registered here;
anything exposing the same handle surface (parameters / loss_and_grads /
state_dict) plugs into the trainer unchanged.

Everything is float32 NCHW.  Weight init draws from the package hash
stream, so two builds with the same backbone, class count, and seed are
bit-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .seeding import hash_u64, mix, unit_from_u64

_INIT_TAG = 0x1417


def normal_array(seed: int, shape: tuple[int, ...], std: float) -> np.ndarray:
    """Deterministic N(0, std^2) array via Box-Muller over the hash stream."""
    n = int(np.prod(shape))
    m = (n + 1) // 2
    u1 = unit_from_u64(hash_u64(seed, np.arange(m, dtype=np.uint64))) + 2.0**-54
    u2 = unit_from_u64(hash_u64(seed, np.arange(m, 2 * m, dtype=np.uint64)))
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])[:n]
    return (std * z).reshape(shape).astype(np.float32)


# -- layers -------------------------------------------------------------------


class Conv2d:
    """3x3 same-padding convolution, stride 1, via im2col."""

    def __init__(self, name: str, in_ch: int, out_ch: int, ksize: int = 3):
        if ksize % 2 != 1:
            raise ConfigError(f"kernel size must be odd, got {ksize}")
        self.name = name
        self.ksize = ksize
        self.params = {
            "weight": np.zeros((out_ch, in_ch, ksize, ksize), dtype=np.float32),
            "bias": np.zeros(out_ch, dtype=np.float32),
        }
        self._cache = None

    def init(self, seed: int):
        w = self.params["weight"]
        fan_in = w.shape[1] * w.shape[2] * w.shape[3]
        self.params["weight"] = normal_array(seed, w.shape, np.sqrt(2.0 / fan_in))

    def forward(self, x: np.ndarray) -> np.ndarray:
        n, c, h, w = x.shape
        pad = self.ksize // 2
        xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
        cols = np.lib.stride_tricks.sliding_window_view(xp, (self.ksize, self.ksize), axis=(2, 3))
        cols = np.ascontiguousarray(cols.transpose(0, 2, 3, 1, 4, 5)).reshape(n, h * w, -1)
        wmat = self.params["weight"].reshape(self.params["weight"].shape[0], -1)
        out = cols @ wmat.T + self.params["bias"]
        self._cache = (x.shape, cols)
        return out.transpose(0, 2, 1).reshape(n, -1, h, w)

    def backward(self, dout: np.ndarray, grads: dict) -> np.ndarray:
        x_shape, cols = self._cache
        self._cache = None
        n, c, h, w = x_shape
        oc = dout.shape[1]
        dmat = dout.reshape(n, oc, h * w).transpose(0, 2, 1)
        wmat = self.params["weight"].reshape(oc, -1)
        grads["weight"] = np.einsum("nso,nsk->ok", dmat, cols).reshape(self.params["weight"].shape)
        grads["bias"] = dout.sum(axis=(0, 2, 3))
        dcols = (dmat @ wmat).reshape(n, h, w, c, self.ksize, self.ksize)
        pad = self.ksize // 2
        dxp = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=np.float32)
        for a in range(self.ksize):
            for b in range(self.ksize):
                dxp[:, :, a : a + h, b : b + w] += dcols[:, :, :, :, a, b].transpose(0, 3, 1, 2)
        return dxp[:, :, pad : pad + h, pad : pad + w]


class ReLU:
    params: dict = {}

    def forward(self, x):
        self._mask = x > 0
        return x * self._mask

    def backward(self, dout, grads):
        return dout * self._mask


class MaxPool2:
    """2x2 max pooling, stride 2; first maximum wins ties."""

    params: dict = {}

    def forward(self, x):
        n, c, h, w = x.shape
        if h % 2 or w % 2:
            raise ConfigError(f"pooling needs even spatial dims, got {h}x{w}")
        xr = x.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
        xr = np.ascontiguousarray(xr).reshape(n, c, h // 2, w // 2, 4)
        self._idx = xr.argmax(axis=-1)
        self._in_shape = (n, c, h, w)
        return np.take_along_axis(xr, self._idx[..., None], axis=-1)[..., 0]

    def backward(self, dout, grads):
        n, c, h, w = self._in_shape
        dxr = np.zeros((n, c, h // 2, w // 2, 4), dtype=np.float32)
        np.put_along_axis(dxr, self._idx[..., None], dout[..., None], axis=-1)
        dxr = dxr.reshape(n, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
        return np.ascontiguousarray(dxr).reshape(n, c, h, w)


class GlobalAvgPool:
    params: dict = {}

    def forward(self, x):
        self._in_shape = x.shape
        return x.mean(axis=(2, 3))

    def backward(self, dout, grads):
        n, c, h, w = self._in_shape
        return np.broadcast_to(dout[:, :, None, None], (n, c, h, w)) / np.float32(h * w)


class Flatten:
    params: dict = {}

    def forward(self, x):
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout, grads):
        return dout.reshape(self._in_shape)


class Linear:
    def __init__(self, name: str, in_features: int, out_features: int):
        self.name = name
        self.params = {
            "weight": np.zeros((out_features, in_features), dtype=np.float32),
            "bias": np.zeros(out_features, dtype=np.float32),
        }
        self._cache = None

    def init(self, seed: int):
        w = self.params["weight"]
        self.params["weight"] = normal_array(seed, w.shape, np.sqrt(2.0 / w.shape[1]))

    def forward(self, x):
        self._cache = x
        return x @ self.params["weight"].T + self.params["bias"]

    def backward(self, dout, grads):
        x = self._cache
        self._cache = None
        grads["weight"] = dout.T @ x
        grads["bias"] = dout.sum(axis=0)
        return dout @ self.params["weight"]


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross entropy and its gradient w.r.t. the logits."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    n = logits.shape[0]
    loss = float(-np.log(probs[np.arange(n), labels] + 1e-12).mean())
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    return loss, (dlogits / n).astype(np.float32)


# -- handle -------------------------------------------------------------------


@dataclass
class ModelHandle:
    """A backbone plus head, with the trainer-facing surface.

    trainable_scope narrows which parameters receive updates: "full" or
    "head-only" (only params of the layer named "head").
    """

    backbone_id: str
    class_count: int
    in_size: int
    layers: list = field(repr=False)
    pretrained_source: str = "random-init"
    trainable_scope: str = "full"

    def _named(self):
        for layer in self.layers:
            if layer.params:
                for key, arr in layer.params.items():
                    yield f"{layer.name}.{key}", layer, key, arr

    def parameters(self) -> dict[str, np.ndarray]:
        return {name: arr for name, _, _, arr in self._named()}

    def head_names(self) -> tuple[str, ...]:
        return tuple(n for n in self.parameters() if n.startswith("head."))

    def trainable_names(self) -> tuple[str, ...]:
        if self.trainable_scope == "head-only":
            return self.head_names()
        return tuple(self.parameters())

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def loss_and_grads(self, x: np.ndarray, labels: np.ndarray):
        """Forward + backward; returns (loss, logits, grads keyed like parameters())."""
        logits = self.forward(x)
        loss, dout = softmax_cross_entropy(logits, labels)
        grads: dict[str, np.ndarray] = {}
        for layer in reversed(self.layers):
            layer_grads: dict[str, np.ndarray] = {}
            dout = layer.backward(dout, layer_grads)
            for key, g in layer_grads.items():
                grads[f"{layer.name}.{key}"] = g
        return loss, logits, grads

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: arr.copy() for name, arr in self.parameters().items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        own = {name: (layer, key) for name, layer, key, _ in self._named()}
        if set(own) != set(state):
            raise ConfigError(
                f"parameter names mismatch: expected {sorted(own)}, got {sorted(state)}"
            )
        for name, (layer, key) in own.items():
            arr = np.asarray(state[name], dtype=np.float32)
            if arr.shape != layer.params[key].shape:
                raise ConfigError(f"shape mismatch for {name}: {arr.shape} vs {layer.params[key].shape}")
            layer.params[key] = arr.copy()

    def clone(self, trainable_scope: str | None = None) -> "ModelHandle":
        twin = build_model(self.backbone_id, self.class_count, self.in_size, seed=0)
        twin.load_state_dict(self.state_dict())
        twin.pretrained_source = self.pretrained_source
        twin.trainable_scope = trainable_scope or self.trainable_scope
        return twin


def _cnn_small(class_count: int, in_size: int) -> list:
    return [
        Conv2d("conv1", 3, 16),
        ReLU(),
        MaxPool2(),
        Conv2d("conv2", 16, 32),
        ReLU(),
        MaxPool2(),
        GlobalAvgPool(),
        Linear("head", 32, class_count),
    ]


def _cnn_tiny(class_count: int, in_size: int) -> list:
    return [
        Conv2d("conv1", 3, 8),
        ReLU(),
        MaxPool2(),
        GlobalAvgPool(),
        Linear("head", 8, class_count),
    ]


def _linear(class_count: int, in_size: int) -> list:
    return [Flatten(), Linear("head", 3 * in_size * in_size, class_count)]


BACKBONES = {
    "cnn-small": _cnn_small,
    "cnn-tiny": _cnn_tiny,
    "linear": _linear,
}


def build_model(backbone_id: str, class_count: int, in_size: int, seed: int) -> ModelHandle:
    """Construct and initialize a registered backbone."""
    if backbone_id not in BACKBONES:
        raise ConfigError(f"unknown backbone {backbone_id!r}; registered: {sorted(BACKBONES)}")
    if class_count < 1:
        raise ConfigError(f"class_count must be >= 1, got {class_count}")
    layers = BACKBONES[backbone_id](class_count, in_size)
    counter = 0
    for layer in layers:
        if hasattr(layer, "init"):
            layer.init(mix(seed, _INIT_TAG, counter))
            counter += 1
    return ModelHandle(
        backbone_id=backbone_id, class_count=class_count, in_size=in_size, layers=layers
    )


# -- checkpoints --------------------------------------------------------------


def save_checkpoint(model: ModelHandle, stem: str | Path, *, stage: str, epoch: int, seed: int):
    """Write `<stem>.npz` (parameters) and `<stem>.json` (descriptor)."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    np.savez(stem.with_suffix(".npz"), **model.state_dict())
    descriptor = {
        "backbone_id": model.backbone_id,
        "class_count": model.class_count,
        "in_size": model.in_size,
        "stage": stage,
        "epoch": epoch,
        "seed": seed,
    }
    stem.with_suffix(".json").write_text(
        json.dumps(descriptor, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_checkpoint(stem: str | Path) -> tuple[ModelHandle, dict]:
    stem = Path(stem)
    sidecar = stem.with_suffix(".json")
    if not sidecar.is_file():
        raise ConfigError(f"checkpoint descriptor not found: {sidecar}")
    descriptor = json.loads(sidecar.read_text(encoding="utf-8"))
    model = build_model(
        descriptor["backbone_id"], descriptor["class_count"], descriptor["in_size"], seed=0
    )
    with np.load(stem.with_suffix(".npz")) as data:
        model.load_state_dict({name: data[name] for name in data.files})
    return model, descriptor
