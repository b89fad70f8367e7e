"""Penalized empirical risk minimization with Adam and patience-based stopping."""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dgp import Trajectory
from .net import LOSSES, Architecture, Network, loss_and_gradient, mean_loss
from .penalty import PenaltyParams, penalty_subgradient, penalty_value
from .seeding import rng_for

log = logging.getLogger(__name__)

MONITORS = ("train_loss", "penalized")


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, value: float):
        super().__init__(f"non-finite training loss ({value}) at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32
    patience: int = 30
    max_epochs: int = 1000
    loss: str = "square"
    penalty: PenaltyParams = PenaltyParams(0.0, 1.0)
    seed: int = 0
    shuffle_seed: int | None = None
    init_scheme: str = "he_uniform"
    monitor: str = "train_loss"

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("Adam betas must lie in [0, 1)")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.patience < 1 or self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("patience, batch_size and max_epochs must be >= 1")
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}")
        if self.init_scheme != "he_uniform":
            raise ValueError("only the he_uniform initialization is supported")
        if self.monitor not in MONITORS:
            raise ValueError(f"monitor must be one of {MONITORS}")

    def with_penalty(self, lam: float, tau: float) -> "TrainConfig":
        return replace(self, penalty=PenaltyParams(lam, tau))

    def unpenalized(self) -> "TrainConfig":
        return replace(self, penalty=PenaltyParams(0.0, self.penalty.tau))


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def fresh(cls, n_params: int) -> "AdamState":
        return cls(np.zeros(n_params), np.zeros(n_params), 0)

    def copy(self) -> "AdamState":
        return AdamState(self.m.copy(), self.v.copy(), self.t)


def adam_step(state: AdamState, params: np.ndarray, grad: np.ndarray, cfg: TrainConfig,
              inplace: bool = False, work: np.ndarray | None = None):
    """One bias-corrected Adam update; returns ``(state, params)``.

    With ``inplace=True`` the state arrays and ``params`` are overwritten,
    which is what the training loop uses; ``work`` is an optional scratch
    buffer of the same length.
    """
    if not (params.shape == grad.shape == state.m.shape == state.v.shape):
        raise ValueError(
            f"length mismatch: params {params.shape}, grad {grad.shape}, "
            f"m {state.m.shape}, v {state.v.shape}"
        )
    b1, b2 = cfg.beta1, cfg.beta2
    if not inplace:
        state = state.copy()
        params = params.copy()
    if work is None:
        work = np.empty_like(params)
    m, v = state.m, state.v
    state.t += 1
    t = state.t
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t

    m *= b1
    np.multiply(grad, 1.0 - b1, out=work)
    m += work
    v *= b2
    np.multiply(grad, grad, out=work)
    work *= 1.0 - b2
    v += work

    # work <- sqrt(v / bc2) + eps, then the step m_hat / work
    np.divide(v, bc2, out=work)
    np.sqrt(work, out=work)
    work += cfg.epsilon
    if cfg.epsilon == 0.0:
        # with no epsilon a zero second moment means a zero gradient history
        work[work == 0.0] = np.inf
    np.divide(m, work, out=work)
    work *= cfg.learning_rate / bc1
    params -= work
    return state, params


class EarlyStopping:
    """Tracks the best monitored value and signals a stop after ``patience``
    consecutive epochs without strict improvement."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best = math.inf
        self.best_epoch = -1
        self.wait = 0

    def update(self, epoch: int, value: float) -> tuple[bool, bool]:
        """Returns ``(improved, should_stop)``."""
        if value < self.best:
            self.best, self.best_epoch, self.wait = value, epoch, 0
            return True, False
        self.wait += 1
        return False, self.wait >= self.patience


@dataclass
class TrainingHistory:
    train_loss: list[float] = field(default_factory=list)
    penalty: list[float] = field(default_factory=list)
    best_flag: list[bool] = field(default_factory=list)
    checkpoints: list[str] = field(default_factory=list)  # digest of params after each epoch
    best_epoch: int = 0
    init_scheme: str = "he_uniform"
    stopped_early: bool = False

    @property
    def epochs(self) -> int:
        return len(self.train_loss)

    def objective(self) -> list[float]:
        return [a + b for a, b in zip(self.train_loss, self.penalty)]

    def to_table(self, sep: str = ",") -> str:
        buf = io.StringIO()
        buf.write(sep.join(["epoch", "train_loss", "penalty_value", "monitored_best_flag"]) + "\n")
        for k, (lo, pe, fl) in enumerate(zip(self.train_loss, self.penalty, self.best_flag), 1):
            buf.write(sep.join([str(k), format(lo, ".17g"), format(pe, ".17g"), str(int(fl))]) + "\n")
        return buf.getvalue()


def train(data: Trajectory, cfg: TrainConfig, arch: Architecture) -> tuple[Network, TrainingHistory]:
    """Minimize mean loss plus the clipped-L1 penalty with minibatch Adam.

    Weights are He-uniform from the ``init`` stream of ``cfg.seed`` and
    minibatches are reshuffled every epoch from ``cfg.shuffle_seed`` (or the
    ``shuffle`` stream of ``cfg.seed`` when that is unset). After
    each epoch the full-sample loss and penalty are recorded; the network
    with the best monitored value is returned.
    """
    X, y = data.features, data.targets
    n = X.shape[0]
    if n == 0:
        raise ValueError("empty training trajectory")
    if arch.input_dim != data.dim:
        raise ValueError(f"architecture input_dim {arch.input_dim} != feature dimension {data.dim}")

    net = Network.he_uniform(arch, rng_for(cfg.seed, "init"))
    # non-finite losses are turned into TrainingDiverged below
    with np.errstate(over="ignore", invalid="ignore"):
        return _fit(net, X, y, cfg, arch)


def _fit(net, X, y, cfg, arch):
    n = X.shape[0]
    if cfg.shuffle_seed is None:
        shuffle_rng = rng_for(cfg.seed, "shuffle")
    else:
        shuffle_rng = rng_for(cfg.shuffle_seed)
    state = AdamState.fresh(arch.n_params)
    pen = cfg.penalty
    stopper = EarlyStopping(cfg.patience)
    hist = TrainingHistory(init_scheme=cfg.init_scheme)
    best_theta = net.flatten()
    theta = net.theta
    bs = cfg.batch_size
    work = np.empty_like(theta)
    pen_buf = np.empty_like(theta)

    for epoch in range(1, cfg.max_epochs + 1):
        order = shuffle_rng.permutation(n)
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            _, grad = loss_and_gradient(net, X[idx], y[idx], cfg.loss)
            if pen.lam > 0:
                grad += penalty_subgradient(theta, pen, out=pen_buf)
            adam_step(state, theta, grad, cfg, inplace=True, work=work)

        loss = mean_loss(net, X, y, cfg.loss)
        pval = penalty_value(theta, pen)
        if not (math.isfinite(loss) and math.isfinite(pval)):
            raise TrainingDiverged(epoch, loss)
        monitored = loss if cfg.monitor == "train_loss" else loss + pval
        improved, stop = stopper.update(epoch, monitored)
        hist.train_loss.append(loss)
        hist.penalty.append(pval)
        hist.best_flag.append(improved)
        hist.checkpoints.append(net.digest())
        if improved:
            best_theta = theta.copy()
            hist.best_epoch = epoch
        if stop:
            hist.stopped_early = True
            log.debug("early stop at epoch %d (best %d)", epoch, hist.best_epoch)
            break

    return Network(arch, best_theta), hist
