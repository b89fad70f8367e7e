"""Reference computations kept independent of the package internals."""

import math

import numpy as np

from spdnn.net import Architecture, Network


def naive_forward(weights, biases, x, clamp=math.inf):
    """Scalar-loop MLP forward pass: ReLU hidden layers, identity output."""
    a = [float(v) for v in x]
    L = len(weights)
    for k, (W, b) in enumerate(zip(weights, biases)):
        fan_in, fan_out = len(W), len(W[0])
        z = [sum(a[r] * W[r][c] for r in range(fan_in)) + b[c] for c in range(fan_out)]
        a = z if k == L - 1 else [max(v, 0.0) for v in z]
    out = a[0]
    return min(max(out, -clamp), clamp)


def naive_mean_loss(weights, biases, X, y, loss, clamp=math.inf):
    total = 0.0
    for xi, yi in zip(X, y):
        h = naive_forward(weights, biases, xi, clamp)
        total += (yi - h) ** 2 if loss == "square" else max(1.0 - yi * h, 0.0)
    return total / len(y)


def unpack(theta, shapes):
    """Split a flat vector into (W, b) lists using the row-major layout."""
    weights, biases, k = [], [], 0
    for fan_in, fan_out in shapes:
        W = np.asarray(theta[k:k + fan_in * fan_out]).reshape(fan_in, fan_out).tolist()
        k += fan_in * fan_out
        b = list(theta[k:k + fan_out])
        k += fan_out
        weights.append(W)
        biases.append(b)
    return weights, biases


def central_differences(f, theta, step=1e-6):
    theta = np.array(theta, dtype=np.float64)
    g = np.empty_like(theta)
    for k in range(theta.size):
        old = theta[k]
        theta[k] = old + step
        up = f(theta)
        theta[k] = old - step
        down = f(theta)
        theta[k] = old
        g[k] = (up - down) / (2 * step)
    return g


def hand_adam(params, grads, lr, b1, b2, eps):
    """Adam recursions written out per scalar coordinate."""
    params = [float(p) for p in params]
    m = [0.0] * len(params)
    v = [0.0] * len(params)
    seq = []
    for t, g in enumerate(grads, 1):
        for k in range(len(params)):
            m[k] = b1 * m[k] + (1 - b1) * g[k]
            v[k] = b2 * v[k] + (1 - b2) * g[k] ** 2
            mh = m[k] / (1 - b1**t)
            vh = v[k] / (1 - b2**t)
            params[k] -= lr * mh / (math.sqrt(vh) + eps)
        seq.append(list(params))
    return seq


def random_case(rng, loss, margin=1e-4, clamp=False):
    """A small random network and batch whose kinks are all at least ``margin`` away.

    Returns ``None`` when the draw lands too close to a kink so callers can redraw.
    """
    d = int(rng.integers(1, 5))
    widths = tuple(int(w) for w in rng.integers(1, 9, size=int(rng.integers(1, 4))))
    F = float(rng.uniform(0.3, 2.0)) if clamp else math.inf
    arch = Architecture(d, widths, F)
    net = Network(arch, rng.normal(0.0, 0.8, size=arch.n_params))
    m = int(rng.integers(1, 7))
    X = rng.normal(size=(m, d))
    if loss == "square":
        y = rng.normal(size=m)
    else:
        y = rng.choice([-1.0, 1.0], size=m)

    a = X
    for W, b in net.layers[:-1]:
        z = a @ W + b
        if np.min(np.abs(z)) < margin:
            return None
        a = np.maximum(z, 0.0)
    W, b = net.layers[-1]
    raw = (a @ W + b)[:, 0]
    if math.isfinite(F) and np.min(np.abs(np.abs(raw) - F)) < margin:
        return None
    out = np.clip(raw, -F, F)
    if loss == "hinge" and np.min(np.abs(1.0 - y * out)) < margin:
        return None
    return net, X, y
