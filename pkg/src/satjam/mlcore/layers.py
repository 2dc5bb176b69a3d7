"""Neural-network layers with explicit forward/backward passes.

Everything is plain numpy on row-major arrays. Image batches are
(batch, channels, height, width); dense batches are (batch, features).
Each layer caches what its backward pass needs; params and grads are
name-keyed dicts so an optimizer can walk them in a stable order.
Dtypes follow the input (float32 for training, float64 for the
finite-difference checks).
"""

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import DomainError, ShapeError
from ..validation import RngLike, as_rng


def glorot_uniform(rng: np.random.Generator, shape: tuple, fan_in: int,
                   fan_out: int, dtype=np.float32) -> np.ndarray:
    """Uniform on [-a, a] with a = sqrt(6 / (fan_in + fan_out))."""
    a = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, size=shape).astype(dtype)


class Layer:
    """Minimal layer protocol; stateless layers keep empty param dicts."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.buffers: dict[str, np.ndarray] = {}

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dout: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Conv2D(Layer):
    """3x3 stride-1 same-padded cross-correlation."""

    def __init__(self, in_channels: int, out_channels: int, seed: RngLike = None):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        rng = as_rng(seed)
        fan_in, fan_out = in_channels * 9, out_channels * 9
        self.params = {
            "weight": glorot_uniform(rng, (out_channels, in_channels, 3, 3), fan_in, fan_out),
            "bias": np.zeros(out_channels, dtype=np.float32),
        }
        self._cols = None
        self._x_shape = None

    @staticmethod
    def _im2col(x: np.ndarray) -> np.ndarray:
        b, c, h, w = x.shape
        xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
        windows = sliding_window_view(xp, (3, 3), axis=(2, 3))  # (b, c, h, w, 3, 3)
        return np.ascontiguousarray(
            windows.transpose(0, 2, 3, 1, 4, 5).reshape(b, h * w, c * 9))

    def forward(self, x, train=False):
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise ShapeError(
                f"expected (b, {self.in_channels}, h, w) input, got {x.shape}")
        b, _, h, w = x.shape
        weight, bias = self.params["weight"], self.params["bias"]
        cols = self._im2col(x)
        wmat = weight.reshape(self.out_channels, -1)
        out = cols @ wmat.T + bias
        self._cols, self._x_shape = cols, x.shape
        return out.transpose(0, 2, 1).reshape(b, self.out_channels, h, w)

    def backward(self, dout):
        b, c, h, w = self._x_shape
        dmat = dout.reshape(dout.shape[0], self.out_channels, h * w).transpose(0, 2, 1)
        wmat = self.params["weight"].reshape(self.out_channels, -1)
        dweight = np.tensordot(dmat, self._cols, axes=([0, 1], [0, 1]))
        self.grads = {
            "weight": dweight.reshape(self.params["weight"].shape),
            "bias": dout.sum(axis=(0, 2, 3)),
        }
        dcols = dmat @ wmat  # (b, h*w, c*9)
        dwin = dcols.reshape(b, h, w, c, 3, 3).transpose(0, 3, 1, 2, 4, 5)
        dxp = np.zeros((b, c, h + 2, w + 2), dtype=dout.dtype)
        for di in range(3):
            for dj in range(3):
                dxp[:, :, di:di + h, dj:dj + w] += dwin[:, :, :, :, di, dj]
        return dxp[:, :, 1:1 + h, 1:1 + w]


class BatchNorm(Layer):
    """Per-channel batch normalization with momentum-tracked inference stats.

    Works on (b, c, h, w) reducing over (b, h, w), or (b, f) reducing over
    the batch. Training batches must have at least two samples.
    """

    def __init__(self, n_channels: int, momentum: float = 0.1, eps: float = 1e-5):
        super().__init__()
        self.n_channels = n_channels
        self.momentum = momentum
        self.eps = eps
        self.params = {
            "gamma": np.ones(n_channels, dtype=np.float32),
            "beta": np.zeros(n_channels, dtype=np.float32),
        }
        self.buffers = {
            "running_mean": np.zeros(n_channels, dtype=np.float32),
            "running_var": np.ones(n_channels, dtype=np.float32),
        }
        self._cache = None

    def _axes_and_shape(self, x):
        if x.ndim == 4:
            return (0, 2, 3), (1, self.n_channels, 1, 1)
        if x.ndim == 2:
            return (0,), (1, self.n_channels)
        raise ShapeError(f"batch norm expects 2-D or 4-D input, got {x.ndim}-D")

    def forward(self, x, train=False):
        axes, shape = self._axes_and_shape(x)
        if x.shape[1] != self.n_channels:
            raise ShapeError(f"expected {self.n_channels} channels, got {x.shape[1]}")
        gamma = self.params["gamma"].reshape(shape)
        beta = self.params["beta"].reshape(shape)
        if train:
            if x.shape[0] < 2:
                raise DomainError("batch norm needs batches of >= 2 in training mode")
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            m = self.momentum
            self.buffers["running_mean"] = (
                (1 - m) * self.buffers["running_mean"] + m * mean).astype(np.float32)
            self.buffers["running_var"] = (
                (1 - m) * self.buffers["running_var"] + m * var).astype(np.float32)
        else:
            mean = self.buffers["running_mean"].astype(x.dtype)
            var = self.buffers["running_var"].astype(x.dtype)
        inv_std = 1.0 / np.sqrt(var.reshape(shape) + self.eps)
        xhat = (x - mean.reshape(shape)) * inv_std
        if train:
            self._cache = (xhat, inv_std, axes, shape)
        return gamma * xhat + beta

    def backward(self, dout):
        xhat, inv_std, axes, shape = self._cache
        gamma = self.params["gamma"].reshape(shape)
        self.grads = {
            "gamma": (dout * xhat).sum(axis=axes),
            "beta": dout.sum(axis=axes),
        }
        dxhat = dout * gamma
        mean_d = dxhat.mean(axis=axes).reshape(shape)
        mean_dx = (dxhat * xhat).mean(axis=axes).reshape(shape)
        return inv_std * (dxhat - mean_d - xhat * mean_dx)


class ReLU(Layer):
    def forward(self, x, train=False):
        self._mask = x > 0
        return x * self._mask

    def backward(self, dout):
        return dout * self._mask


class MaxPool2x2(Layer):
    """2x2 max pooling with stride 2; spatial dims must be even."""

    def forward(self, x, train=False):
        b, c, h, w = x.shape
        if h % 2 or w % 2:
            raise ShapeError(f"pooling needs even spatial dims, got {h}x{w}")
        cells = x.reshape(b, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
        cells = cells.reshape(b, c, h // 2, w // 2, 4)
        self._arg = cells.argmax(axis=-1)
        self._in_shape = x.shape
        return np.take_along_axis(cells, self._arg[..., None], axis=-1)[..., 0]

    def backward(self, dout):
        b, c, h, w = self._in_shape
        dcells = np.zeros((b, c, h // 2, w // 2, 4), dtype=dout.dtype)
        np.put_along_axis(dcells, self._arg[..., None], dout[..., None], axis=-1)
        dcells = dcells.reshape(b, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
        return dcells.reshape(b, c, h, w)


class Dropout(Layer):
    """Inverted dropout: keep with probability 1-p, scale kept units by 1/(1-p)."""

    def __init__(self, p: float = 0.5, seed: RngLike = None):
        super().__init__()
        if not 0 <= p < 1:
            raise DomainError(f"dropout rate must be in [0, 1), got {p}")
        self.p = p
        self.rng = as_rng(seed)

    def forward(self, x, train=False):
        if not train or self.p == 0:
            self._mask = None
            return x
        keep = 1.0 - self.p
        self._mask = (self.rng.random(x.shape) < keep) / keep
        return x * self._mask.astype(x.dtype)

    def backward(self, dout):
        if self._mask is None:
            return dout
        return dout * self._mask.astype(dout.dtype)


class Flatten(Layer):
    def forward(self, x, train=False):
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._in_shape)


class Dense(Layer):
    def __init__(self, in_features: int, out_features: int, seed: RngLike = None):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        rng = as_rng(seed)
        self.params = {
            "weight": glorot_uniform(rng, (in_features, out_features),
                                     in_features, out_features),
            "bias": np.zeros(out_features, dtype=np.float32),
        }

    def forward(self, x, train=False):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ShapeError(f"expected (b, {self.in_features}) input, got {x.shape}")
        self._x = x
        return x @ self.params["weight"] + self.params["bias"]

    def backward(self, dout):
        self.grads = {
            "weight": self._x.T @ dout,
            "bias": dout.sum(axis=0),
        }
        return dout @ self.params["weight"].T


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over the batch and its gradient w.r.t. the logits."""
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise ShapeError(
            f"logits {logits.shape} and labels {labels.shape} are inconsistent")
    b = logits.shape[0]
    probs = softmax(logits)
    picked = probs[np.arange(b), labels]
    loss = float(-np.mean(np.log(np.maximum(picked, 1e-300))))
    dlogits = probs.copy()
    dlogits[np.arange(b), labels] -= 1.0
    return loss, dlogits / b


class Network:
    """Sequential container: forward, backward, and flat parameter access."""

    def __init__(self, layers: list[Layer]):
        self.layers = layers

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x, train=train)
        return x

    def backward(self, dout: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            dout = layer.backward(dout)
        return dout

    def named_params(self) -> list[tuple[str, Layer, str]]:
        out = []
        for i, layer in enumerate(self.layers):
            for name in layer.params:
                out.append((f"layer{i}.{name}", layer, name))
        return out

    def param_arrays(self) -> list[np.ndarray]:
        return [layer.params[name] for _, layer, name in self.named_params()]

    def grad_arrays(self) -> list[np.ndarray]:
        return [layer.grads[name] for _, layer, name in self.named_params()]

    def param_count(self) -> int:
        return int(sum(p.size for p in self.param_arrays()))

    def get_state(self) -> dict[str, np.ndarray]:
        """Copies of every parameter and buffer, keyed by layer index."""
        state = {key: layer.params[name].copy()
                 for key, layer, name in self.named_params()}
        for i, layer in enumerate(self.layers):
            for name, value in layer.buffers.items():
                state[f"layer{i}.{name}"] = value.copy()
        return state

    def set_state(self, state: dict[str, np.ndarray]) -> None:
        for key, layer, name in self.named_params():
            layer.params[name] = state[key].copy()
        for i, layer in enumerate(self.layers):
            for name in layer.buffers:
                layer.buffers[name] = state[f"layer{i}.{name}"].copy()
