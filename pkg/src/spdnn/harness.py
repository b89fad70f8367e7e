"""Simulation-study pipeline: (lambda, tau) grid search on a validation
trajectory, SPDNN versus unpenalized comparison, test-set error and
replication over seeds."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Union

import numpy as np

from .dgp import DgpKind, SimulationError, Trajectory, bayes_classifier, simulate
from .net import Architecture, Network, mean_loss
from .optim import TrainConfig, TrainingDiverged, TrainingHistory, train
from .penalty import effective_sparsity
from .seeding import STREAMS, stream_seed

log = logging.getLogger(__name__)

Predictor = Union[Network, Callable[[np.ndarray], np.ndarray]]

SPDNN = "SPDNN"
NPDNN = "NPDNN"
TEST_SIZE = 10_000
DEFAULT_HIDDEN = (100, 100)
FAILURE_TOLERANCE = 0.10


class ReplicationError(RuntimeError):
    pass


class GridSearchFailed(TrainingDiverged):
    def __init__(self, n_points: int):
        RuntimeError.__init__(self, f"all {n_points} grid points diverged")
        self.epoch = -1


@dataclass(frozen=True)
class GridSpec:
    n: int
    i_range: tuple[int, ...] = tuple(range(11))
    j_range: tuple[int, ...] = tuple(range(11))

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2 so that log(n) > 0")
        object.__setattr__(self, "i_range", tuple(int(i) for i in self.i_range))
        object.__setattr__(self, "j_range", tuple(int(j) for j in self.j_range))
        if not self.i_range or not self.j_range:
            raise ValueError("grid ranges must be nonempty")

    def lam(self, i: int) -> float:
        return 10.0 ** (-i) * math.log(self.n) / self.n

    def tau(self, j: int) -> float:
        return 10.0 ** (-j) / math.log(self.n)

    def points(self) -> list[tuple[int, int]]:
        return [(i, j) for i in self.i_range for j in self.j_range]

    @property
    def size(self) -> int:
        return len(self.i_range) * len(self.j_range)


@dataclass(frozen=True)
class GridRow:
    i: int
    j: int
    lam: float
    tau: float
    score: float


@dataclass
class GridSearchResult:
    net: Network
    best: tuple[int, int]
    table: list[GridRow]
    history: TrainingHistory
    skipped: list[tuple[int, int]] = field(default_factory=list)


@dataclass(frozen=True)
class ExperimentResult:
    method: str
    dgp: DgpKind
    n: int
    replication: int
    error: float
    sparsity: int
    seed: int
    i: int | None = None
    j: int | None = None

    def __post_init__(self):
        if self.method not in (SPDNN, NPDNN):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == NPDNN and (self.i is not None or self.j is not None):
            raise ValueError("NPDNN records carry no grid indices")


def _predict(model: Predictor, X: np.ndarray) -> np.ndarray:
    if isinstance(model, Network):
        return model.predict(X)
    return np.asarray(model(X), dtype=np.float64).reshape(-1)


def validation_score(net: Network, valid: Trajectory, loss: str) -> float:
    return mean_loss(net, valid.features, valid.targets, loss)


def select_best(table: Iterable[GridRow]) -> GridRow:
    """Lowest score; ties go to the sparser setting (larger i, then larger j)."""
    return min(table, key=lambda r: (r.score, -r.i, -r.j))


def grid_search(train_data: Trajectory, valid: Trajectory, grid: GridSpec, cfg: TrainConfig,
                arch: Architecture) -> GridSearchResult:
    if train_data.kind != valid.kind or train_data.dim != valid.dim:
        raise ValueError("training and validation trajectories differ in kind or dimension")
    table, nets, skipped = [], {}, []
    for i, j in grid.points():
        point_cfg = cfg.with_penalty(grid.lam(i), grid.tau(j))
        try:
            net, hist = train(train_data, point_cfg, arch)
        except TrainingDiverged as exc:
            log.warning("grid point (i=%d, j=%d) skipped: %s", i, j, exc)
            skipped.append((i, j))
            continue
        score = validation_score(net, valid, cfg.loss)
        if not math.isfinite(score):
            log.warning("grid point (i=%d, j=%d) skipped: non-finite validation score", i, j)
            skipped.append((i, j))
            continue
        table.append(GridRow(i, j, grid.lam(i), grid.tau(j), score))
        nets[i, j] = (net, hist)
    if not table:
        raise GridSearchFailed(grid.size)
    best = select_best(table)
    net, hist = nets[best.i, best.j]
    return GridSearchResult(net, (best.i, best.j), table, hist, skipped)


def train_unpenalized(train_data: Trajectory, cfg: TrainConfig, arch: Architecture):
    """The NPDNN baseline: the same training path with lambda = 0."""
    return train(train_data, cfg.unpenalized(), arch)


def evaluate_l2(model: Predictor, test: Trajectory, vs_targets: bool = False) -> float:
    """Mean squared distance to the true regression function on ``test``.

    With ``vs_targets`` the noisy targets replace the true function (test MSE).
    """
    pred = _predict(model, test.features)
    ref = test.targets if vs_targets else test.true_mean()
    d = pred - ref
    return float(np.mean(d * d))


def evaluate_excess_risk(model: Predictor, test: Trajectory) -> float:
    """Empirical hinge risk of ``model`` minus that of the Bayes classifier."""
    if test.kind.task != "binary":
        raise ValueError("excess risk needs a binary trajectory")
    y = test.targets
    pred = _predict(model, test.features)
    bayes = bayes_classifier(test.kind, test.features)
    return float(np.mean(np.maximum(1.0 - y * pred, 0.0) - np.maximum(1.0 - y * bayes, 0.0)))


def evaluate(model: Predictor, test: Trajectory, vs_targets: bool = False) -> float:
    if test.kind.task == "binary":
        return evaluate_excess_risk(model, test)
    return evaluate_l2(model, test, vs_targets)


def default_arch(kind: DgpKind, lags: int | None = None, hidden=DEFAULT_HIDDEN) -> Architecture:
    q = kind.lags if lags is None else lags
    return Architecture(input_dim=q + 1, hidden_widths=tuple(hidden))


def run_replication(kind: DgpKind, n: int, r: int, base_seed: int, grid: GridSpec,
                    cfg: TrainConfig, arch: Architecture, m: int = TEST_SIZE,
                    lags: int | None = None, vs_targets: bool = False) -> list[ExperimentResult]:
    """One replication: returns its SPDNN and NPDNN records."""
    seeds = {tag: stream_seed(base_seed, r, tag) for tag in STREAMS}
    rcfg = replace(cfg, seed=seeds["init"], shuffle_seed=seeds["shuffle"])
    tr = simulate(kind, n, seeds["train"], lags=lags)
    va = simulate(kind, n, seeds["valid"], lags=lags)
    te = simulate(kind, m, seeds["test"], lags=lags)
    gs = grid_search(tr, va, grid, rcfg, arch)
    np_net, _ = train_unpenalized(tr, rcfg, arch)
    i, j = gs.best
    return [
        ExperimentResult(SPDNN, kind, n, r, evaluate(gs.net, te, vs_targets),
                         effective_sparsity(gs.net.theta), base_seed, i, j),
        ExperimentResult(NPDNN, kind, n, r, evaluate(np_net, te, vs_targets),
                         effective_sparsity(np_net.theta), base_seed),
    ]


def _guarded(args):
    try:
        return run_replication(*args)
    except (TrainingDiverged, SimulationError) as exc:
        return exc


def replicate(dgp, n: int, R: int, base_seed: int, *, grid: GridSpec | None = None,
              cfg: TrainConfig | None = None, arch: Architecture | None = None,
              m: int = TEST_SIZE, lags: int | None = None, vs_targets: bool = False,
              workers: int = 1, progress: Callable[[int], None] | None = None) -> list[ExperimentResult]:
    """Run ``R`` independent replications and return two records per replication.

    Each replication simulates independent training (n), validation (n) and
    test (m) trajectories, tunes the SPDNN over ``grid`` and trains the
    unpenalized baseline with the same initialization and shuffling seeds.
    Failed replications are skipped; more than 10% failures is an error.
    Output order is (replication, method) whatever ``workers`` is.
    """
    kind = DgpKind.parse(dgp)
    grid = grid or GridSpec(n)
    if grid.n != n:
        raise ValueError(f"grid was built for n={grid.n}, replicate called with n={n}")
    cfg = replace(cfg or TrainConfig(), loss=kind.loss)
    arch = arch or default_arch(kind, lags)
    jobs = [(kind, n, r, base_seed, grid, cfg, arch, m, lags, vs_targets) for r in range(R)]

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_guarded, jobs))
    else:
        outcomes = []
        for job in jobs:
            outcomes.append(_guarded(job))
            if progress is not None:
                progress(job[2])

    results: list[ExperimentResult] = []
    failures = [(r, o) for r, o in enumerate(outcomes) if isinstance(o, Exception)]
    for r, exc in failures:
        log.warning("replication %d failed: %s", r, exc)
    if len(failures) > FAILURE_TOLERANCE * R:
        raise ReplicationError(f"{len(failures)} of {R} replications failed") from failures[0][1]
    for o in outcomes:
        if not isinstance(o, Exception):
            results.extend(o)
    results.sort(key=lambda e: (e.replication, e.method != SPDNN))
    return results
