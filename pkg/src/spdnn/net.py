"""Fixed-architecture ReLU multilayer perceptron with exact backpropagation.

All parameters live in one flat float64 vector ``theta``; per-layer weight
matrices and bias vectors are views into it. Weights are stored with shape
``(fan_in, fan_out)`` so a batch ``X`` of shape ``(m, d)`` is propagated as
``X @ W + b``. The flat layout is, per layer, the row-major weight matrix
followed by the bias vector.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

LOSSES = ("square", "hinge")


class ShapeError(ValueError):
    """Raised when an input does not match the dimension expected by a layer."""


@dataclass(frozen=True)
class Architecture:
    input_dim: int
    hidden_widths: tuple[int, ...]
    output_clamp: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "hidden_widths", tuple(int(w) for w in self.hidden_widths))
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be >= 1, got {self.input_dim}")
        if len(self.hidden_widths) < 1:
            raise ValueError("at least one hidden layer is required")
        if any(w < 1 for w in self.hidden_widths):
            raise ValueError(f"hidden widths must be >= 1, got {self.hidden_widths}")
        if not self.output_clamp > 0:
            raise ValueError(f"output_clamp must be positive, got {self.output_clamp}")

    @property
    def output_dim(self) -> int:
        return 1

    @property
    def depth(self) -> int:
        return len(self.hidden_widths)

    @property
    def width(self) -> int:
        return max(self.hidden_widths)

    @property
    def widths(self) -> tuple[int, ...]:
        """Full width vector (p_0, ..., p_{L+1})."""
        return (self.input_dim, *self.hidden_widths, 1)

    def layer_shapes(self) -> list[tuple[int, int]]:
        p = self.widths
        return [(p[j], p[j + 1]) for j in range(len(p) - 1)]

    @property
    def n_params(self) -> int:
        return sum(a * b + b for a, b in self.layer_shapes())


@dataclass
class Network:
    arch: Architecture
    theta: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.theta = np.ascontiguousarray(self.theta, dtype=np.float64)
        if self.theta.shape != (self.arch.n_params,):
            raise ShapeError(
                f"parameter vector has shape {self.theta.shape}, "
                f"architecture needs ({self.arch.n_params},)"
            )
        self._layers = _layer_views(self.arch, self.theta)

    @classmethod
    def zeros(cls, arch: Architecture) -> "Network":
        return cls(arch, np.zeros(arch.n_params))

    @classmethod
    def from_layers(cls, arch: Architecture, weights: Sequence, biases: Sequence) -> "Network":
        parts = []
        for j, ((fan_in, fan_out), W, b) in enumerate(zip(arch.layer_shapes(), weights, biases), 1):
            W = np.asarray(W, dtype=np.float64)
            b = np.asarray(b, dtype=np.float64).reshape(-1)
            if W.shape != (fan_in, fan_out) or b.shape != (fan_out,):
                raise ShapeError(
                    f"layer {j}: expected W {(fan_in, fan_out)} and b ({fan_out},), "
                    f"got W {W.shape} and b {b.shape}"
                )
            parts += [W.ravel(), b]
        if len(parts) != 2 * len(arch.layer_shapes()):
            raise ShapeError("number of layers does not match the architecture")
        return cls(arch, np.concatenate(parts))

    @classmethod
    def he_uniform(cls, arch: Architecture, rng: np.random.Generator) -> "Network":
        """He-uniform weights, U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases."""
        net = cls.zeros(arch)
        for W, _ in net.layers:
            limit = math.sqrt(6.0 / W.shape[0])
            W[...] = rng.uniform(-limit, limit, size=W.shape)
        return net

    @property
    def layers(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return self._layers

    def flatten(self) -> np.ndarray:
        return self.theta.copy()

    def copy(self) -> "Network":
        return Network(self.arch, self.theta.copy())

    def with_params(self, theta: np.ndarray) -> "Network":
        return Network(self.arch, np.array(theta, dtype=np.float64))

    def predict(self, X) -> np.ndarray:
        """Evaluate the network on a batch of shape (m, d); returns shape (m,)."""
        X = _as_batch(X, self.arch.input_dim)
        return _forward(self._layers, self.arch.output_clamp, X)[0]

    def __call__(self, x) -> float:
        return forward(self, x)

    def digest(self) -> str:
        """SHA-256 over the architecture and the exact parameter bytes."""
        h = hashlib.sha256(repr((self.arch.input_dim, self.arch.hidden_widths,
                                 self.arch.output_clamp)).encode())
        h.update(self.theta.tobytes())
        return h.hexdigest()


def unflatten(arch: Architecture, theta) -> Network:
    return Network(arch, np.array(theta, dtype=np.float64))


def _layer_views(arch, theta):
    views, k = [], 0
    for fan_in, fan_out in arch.layer_shapes():
        W = theta[k:k + fan_in * fan_out].reshape(fan_in, fan_out)
        k += fan_in * fan_out
        b = theta[k:k + fan_out]
        k += fan_out
        views.append((W, b))
    return views


def _as_batch(X, d):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != d:
        raise ShapeError(f"layer 1 expects inputs of dimension {d}, got array of shape {X.shape}")
    return X


def _forward(layers, clamp, X):
    """Return (clamped output, cached activations, pre-activations, raw output)."""
    acts = [X]
    pres = []
    a = X
    for W, b in layers[:-1]:
        z = a @ W + b
        pres.append(z)
        a = np.maximum(z, 0.0)
        acts.append(a)
    W, b = layers[-1]
    raw = (a @ W + b)[:, 0]
    out = np.clip(raw, -clamp, clamp) if math.isfinite(clamp) else raw
    return out, acts, pres, raw


def forward(net: Network, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != net.arch.input_dim:
        raise ShapeError(
            f"layer 1 expects an input vector of length {net.arch.input_dim}, got shape {x.shape}"
        )
    return float(net.predict(x)[0])


def loss_and_gradient(net: Network, X, y, loss: str = "square") -> tuple[float, np.ndarray]:
    """Mean loss over a batch and its exact gradient with respect to ``net.theta``.

    Square loss is ``(y - h(x))**2``; hinge loss is ``max(1 - y*h(x), 0)`` and
    requires labels in {-1, +1}. At every kink (ReLU pre-activation equal to
    zero, hinge margin equal to one, output outside the clamp) the derivative
    taken is zero.
    """
    X = _as_batch(X, net.arch.input_dim)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    m = X.shape[0]
    if m == 0:
        raise ValueError("empty batch")
    if y.shape[0] != m:
        raise ShapeError(f"batch has {m} inputs but {y.shape[0]} targets")

    layers = net.layers
    out, acts, pres, raw = _forward(layers, net.arch.output_clamp, X)

    if loss == "square":
        resid = y - out
        value = float(np.mean(resid * resid))
        d_out = -2.0 * resid / m
    elif loss == "hinge":
        if not np.all((y == 1.0) | (y == -1.0)):
            raise ValueError("hinge loss needs labels in {-1, +1}")
        slack = 1.0 - y * out
        value = float(np.mean(np.maximum(slack, 0.0)))
        d_out = np.where(slack > 0.0, -y, 0.0) / m
    else:
        raise ValueError(f"unknown loss {loss!r}; expected one of {LOSSES}")

    clamp = net.arch.output_clamp
    if math.isfinite(clamp):
        d_out = np.where(np.abs(raw) > clamp, 0.0, d_out)

    grad = np.empty_like(net.theta)
    grads = _layer_views(net.arch, grad)
    delta = d_out[:, None]
    for j in range(len(layers) - 1, -1, -1):
        gW, gb = grads[j]
        np.matmul(acts[j].T, delta, out=gW)
        gb[...] = delta.sum(axis=0)
        if j > 0:
            delta = (delta @ layers[j][0].T) * (pres[j - 1] > 0.0)
    return value, grad


def mean_loss(net: Network, X, y, loss: str = "square") -> float:
    out = net.predict(X)
    y = np.asarray(y, dtype=np.float64)
    if loss == "square":
        return float(np.mean((y - out) ** 2))
    if loss == "hinge":
        return float(np.mean(np.maximum(1.0 - y * out, 0.0)))
    raise ValueError(f"unknown loss {loss!r}; expected one of {LOSSES}")


# Plain-text checkpoint format:
#
#   spdnn-mlp 1
#   input_dim <d>
#   hidden <p_1> ... <p_L>
#   clamp <F | inf>
#   layer <j> <fan_in> <fan_out>
#   <fan_in lines of fan_out weights, row-major>
#   bias <j>
#   <one line of fan_out biases>
#
# Every number is written with 17 significant digits, so a save/load cycle is exact.

_MAGIC = "spdnn-mlp 1"


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def dumps(net: Network) -> str:
    a = net.arch
    lines = [
        _MAGIC,
        f"input_dim {a.input_dim}",
        "hidden " + " ".join(str(w) for w in a.hidden_widths),
        f"clamp {_fmt(a.output_clamp)}",
    ]
    for j, (W, b) in enumerate(net.layers, 1):
        lines.append(f"layer {j} {W.shape[0]} {W.shape[1]}")
        lines.extend(" ".join(_fmt(v) for v in row) for row in W)
        lines.append(f"bias {j}")
        lines.append(" ".join(_fmt(v) for v in b))
    return "\n".join(lines) + "\n"


def loads(text: str) -> Network:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != _MAGIC:
        raise ValueError("not an spdnn-mlp checkpoint")
    head = {}
    for ln in lines[1:4]:
        key, _, rest = ln.partition(" ")
        head[key] = rest
    arch = Architecture(
        input_dim=int(head["input_dim"]),
        hidden_widths=tuple(int(w) for w in head["hidden"].split()),
        output_clamp=float(head["clamp"]),
    )
    weights, biases = [], []
    i = 4
    for j, (fan_in, fan_out) in enumerate(arch.layer_shapes(), 1):
        tag = lines[i].split()
        if tag[:2] != ["layer", str(j)] or tuple(map(int, tag[2:4])) != (fan_in, fan_out):
            raise ValueError(f"malformed header for layer {j}: {lines[i]!r}")
        rows = [[float(v) for v in ln.split()] for ln in lines[i + 1:i + 1 + fan_in]]
        i += 1 + fan_in
        if lines[i] != f"bias {j}":
            raise ValueError(f"missing bias block for layer {j}")
        b = [float(v) for v in lines[i + 1].split()]
        i += 2
        weights.append(rows)
        biases.append(b)
    return Network.from_layers(arch, weights, biases)


def save(net: Network, path) -> None:
    Path(path).write_text(dumps(net))


def load(path) -> Network:
    return loads(Path(path).read_text())
