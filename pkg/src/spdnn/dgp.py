"""Simulators for the four autoregressive data-generating processes.

DGP1 and DGP2 are nonlinear autoregressions with an exogenous covariate and
additive noise. DGP3 and DGP4 are binary autoregressions whose conditional
mean ``E[Y_t | past] = f(...)`` lies in [-1, 1]. In every case the exogenous
covariate is a stationary AR(1) process, and both it and the additive noise
are driven by uniform draws on [-2, 2] rescaled to unit variance.

A feature row for time t is ``(Y_{t-1}, ..., Y_{t-q}, X_{t-1})`` where q is the
feature lag order (by default the true lag order p of the process).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

EXOG_PHI = 0.5
BURN_IN = 1000
_UNIFORM_SD = 2.0 / math.sqrt(3.0)


class SimulationError(RuntimeError):
    pass


class DgpKind(enum.Enum):
    DGP1 = "DGP1"
    DGP2 = "DGP2"
    DGP3 = "DGP3"
    DGP4 = "DGP4"

    @property
    def lags(self) -> int:
        return {"DGP1": 3, "DGP2": 1, "DGP3": 1, "DGP4": 2}[self.value]

    @property
    def task(self) -> str:
        return "regression" if self in (DgpKind.DGP1, DgpKind.DGP2) else "binary"

    @property
    def loss(self) -> str:
        return "square" if self.task == "regression" else "hinge"

    @property
    def input_dim(self) -> int:
        return self.lags + 1

    @classmethod
    def parse(cls, name) -> "DgpKind":
        if isinstance(name, cls):
            return name
        s = str(name).strip().upper()
        if s.isdigit():
            s = "DGP" + s
        try:
            return cls(s)
        except ValueError:
            raise ValueError(f"unknown DGP {name!r}; expected one of DGP1..DGP4") from None


def standardized_uniform(rng: np.random.Generator, size) -> np.ndarray:
    """U[-2, 2] draws divided by their standard deviation 2/sqrt(3)."""
    return rng.uniform(-2.0, 2.0, size=size) / _UNIFORM_SD


def _f_scalar(kind, y, x):
    # y[k] is Y_{t-1-k}; x is X_{t-1}
    if kind is DgpKind.DGP1:
        return 1.0 - 0.2 * y[0] + 0.3 * y[1] + 0.25 * y[2] - 0.6 / (1.0 + x * x)
    if kind is DgpKind.DGP2:
        return 0.5 + (-0.4 + 0.25 * math.exp(-2.0 * y[0] * y[0])) * y[0] + 1.5 * x
    if kind is DgpKind.DGP3:
        return -0.15 + (0.1 - 0.2 * math.exp(-0.5 * y[0] * y[0])) * y[0] + 0.25 / (1.0 + x * x)
    return 0.1 + 0.15 * y[0] - 0.25 * y[1] - 0.2 * math.exp(-x * x)


def mean_function(kind, x):
    """True conditional mean f for a feature vector, or row-wise for a matrix.

    ``x`` holds the p lagged outputs (most recent first) followed by the
    lagged exogenous value.
    """
    kind = DgpKind.parse(kind)
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.ndim != 2 or X.shape[1] != kind.input_dim:
        raise ValueError(
            f"{kind.value} expects feature vectors of length {kind.input_dim}, got shape {np.shape(x)}"
        )
    y1, e = X[:, 0], X[:, -1]
    if kind is DgpKind.DGP1:
        f = 1.0 - 0.2 * y1 + 0.3 * X[:, 1] + 0.25 * X[:, 2] - 0.6 / (1.0 + e**2)
    elif kind is DgpKind.DGP2:
        f = 0.5 + (-0.4 + 0.25 * np.exp(-2.0 * y1**2)) * y1 + 1.5 * e
    elif kind is DgpKind.DGP3:
        f = -0.15 + (0.1 - 0.2 * np.exp(-0.5 * y1**2)) * y1 + 0.25 / (1.0 + e**2)
    else:
        f = 0.1 + 0.15 * y1 - 0.25 * X[:, 1] - 0.2 * np.exp(-(e**2))
    return float(f[0]) if single else f


def bayes_classifier(kind, x):
    """``+1`` where f(x) >= 0, else ``-1``."""
    kind = DgpKind.parse(kind)
    if kind.task != "binary":
        raise ValueError(f"{kind.value} is a regression process; no Bayes classifier")
    f = mean_function(kind, x)
    if np.ndim(f) == 0:
        return 1 if f >= 0 else -1
    return np.where(f >= 0, 1.0, -1.0)


def simulate_exog_ar1(n: int, seed, phi: float = EXOG_PHI, burn_in: int = BURN_IN,
                      return_innovations: bool = False):
    """Stationary AR(1) path ``X_t = phi X_{t-1} + u_t`` started at zero."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    u = standardized_uniform(rng, burn_in + n)
    x = np.empty_like(u)
    prev = 0.0
    for t in range(u.size):
        prev = phi * prev + u[t]
        x[t] = prev
    if return_innovations:
        return x[burn_in:], u[burn_in:]
    return x[burn_in:]


def assemble_features(y, exog, lags: int):
    """Lag matrix and targets from aligned raw series.

    Row k (k >= lags) is ``(y[k-1], ..., y[k-lags], exog[k-1])`` with target ``y[k]``.
    """
    y = np.asarray(y, dtype=np.float64)
    exog = np.asarray(exog, dtype=np.float64)
    if y.shape != exog.shape or y.ndim != 1:
        raise ValueError("y and exog must be aligned one-dimensional series")
    m = y.size - lags
    if m < 1:
        raise ValueError(f"need more than {lags} observations")
    cols = [y[lags - k - 1:lags - k - 1 + m] for k in range(lags)]
    cols.append(exog[lags - 1:lags - 1 + m])
    return np.column_stack(cols), y[lags:].copy()


@dataclass
class Trajectory:
    features: np.ndarray
    targets: np.ndarray
    kind: DgpKind
    seed: int | None = None
    burn_in: int = BURN_IN
    lags: int | None = None
    signal: np.ndarray | None = None  # f evaluated on the full true state
    y_raw: np.ndarray | None = None
    exog_raw: np.ndarray | None = None

    def __post_init__(self):
        self.kind = DgpKind.parse(self.kind)
        self.features = np.asarray(self.features, dtype=np.float64)
        self.targets = np.asarray(self.targets, dtype=np.float64)
        if self.lags is None:
            self.lags = self.features.shape[1] - 1
        if self.features.ndim != 2 or self.features.shape[0] != self.targets.shape[0]:
            raise ValueError("features must be (n, d) with one target per row")
        if self.features.shape[1] != self.lags + 1:
            raise ValueError(f"expected {self.lags + 1} feature columns, got {self.features.shape[1]}")
        if self.kind.task == "binary" and not np.all(np.abs(self.targets) == 1.0):
            raise ValueError("binary targets must be in {-1, +1}")

    def __len__(self):
        return self.targets.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def true_mean(self) -> np.ndarray:
        """f at every row; recomputed from features when they hold the full state."""
        if self.lags == self.kind.lags:
            return mean_function(self.kind, self.features)
        if self.signal is None:
            raise ValueError("feature lags differ from the process order and no stored signal")
        return self.signal

    def to_table(self) -> str:
        d = self.dim
        head = [
            f"# kind={self.kind.value}",
            f"# seed={self.seed}",
            f"# burn_in={self.burn_in}",
            f"# lags={self.lags}",
            ",".join([f"x_{k}" for k in range(1, d + 1)] + ["y"]),
        ]
        rows = (
            ",".join(format(v, ".17g") for v in (*row, t))
            for row, t in zip(self.features.tolist(), self.targets.tolist())
        )
        return "\n".join([*head, *rows]) + "\n"

    @classmethod
    def from_table(cls, text: str) -> "Trajectory":
        meta, rows, header = {}, [], None
        for ln in text.splitlines():
            ln = ln.strip()
            if not ln:
                continue
            if ln.startswith("#"):
                k, _, v = ln[1:].strip().partition("=")
                meta[k.strip()] = v.strip()
            elif header is None:
                header = ln.split(",")
            else:
                rows.append([float(v) for v in ln.split(",")])
        if header is None or header[-1] != "y":
            raise ValueError("trajectory table needs a header ending in 'y'")
        arr = np.array(rows, dtype=np.float64).reshape(-1, len(header))
        seed = meta.get("seed")
        return cls(
            features=arr[:, :-1],
            targets=arr[:, -1],
            kind=meta["kind"],
            seed=None if seed in (None, "None") else int(seed),
            burn_in=int(meta.get("burn_in", BURN_IN)),
            lags=int(meta["lags"]) if "lags" in meta else None,
        )

    def save(self, path) -> None:
        Path(path).write_text(self.to_table())

    @classmethod
    def load(cls, path) -> "Trajectory":
        return cls.from_table(Path(path).read_text())


def simulate(kind, n: int, seed, *, lags: int | None = None, burn_in: int = BURN_IN,
             phi: float = EXOG_PHI, zero_noise: bool = False,
             exog_value: float | None = None) -> Trajectory:
    """Simulate ``n`` retained observations of a DGP after ``burn_in`` steps.

    Initial conditions are zero. ``zero_noise`` switches off the additive
    noise (regression kinds only) and ``exog_value`` freezes the exogenous
    covariate at a constant; both exist for testing fixed-point behaviour.
    """
    kind = DgpKind.parse(kind)
    if n < 1:
        raise ValueError("n must be >= 1")
    q = kind.lags if lags is None else int(lags)
    if q < 1:
        raise ValueError("feature lag order must be >= 1")
    p = kind.lags
    pad = max(p, q)
    T = burn_in + n
    rng = np.random.default_rng(seed)
    u = standardized_uniform(rng, T)
    if kind.task == "regression":
        shocks = np.zeros(T) if zero_noise else standardized_uniform(rng, T)
    else:
        shocks = rng.random(T)

    ys = np.zeros(pad + T)
    xs = np.zeros(pad + T)
    fs = np.zeros(pad + T)
    if exog_value is not None:
        xs[:] = exog_value
    binary = kind.task == "binary"
    # overflow is caught by the finiteness check below
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(T):
            t = pad + k
            if exog_value is None:
                xs[t] = phi * xs[t - 1] + u[k]
            f = _f_scalar(kind, (ys[t - 1], ys[t - 2] if p > 1 else 0.0, ys[t - 3] if p > 2 else 0.0), xs[t - 1])
            fs[t] = f
            if binary:
                prob = min(max((1.0 + f) / 2.0, 0.0), 1.0)
                ys[t] = 1.0 if shocks[k] < prob else -1.0
            else:
                ys[t] = f + shocks[k]
            if not math.isfinite(ys[t]):
                raise SimulationError(f"{kind.value} recursion produced a non-finite value at step {k}")

    y_raw = ys[-(n + q):].copy()
    exog_raw = xs[-(n + q):].copy()
    X, Y = assemble_features(y_raw, exog_raw, q)
    return Trajectory(
        features=X, targets=Y, kind=kind, seed=seed, burn_in=burn_in, lags=q,
        signal=fs[-n:].copy(), y_raw=y_raw, exog_raw=exog_raw,
    )
