"""Command-line interface.

Every subcommand accepts ``--config FILE``: a plain-text file of ``key = value``
lines (``#`` starts a comment) whose keys are option names with dashes or
underscores, e.g. ``max-epochs = 300``. Values from the file become defaults;
flags given on the command line win.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import net as netmod
from .dgp import DgpKind, Trajectory, simulate
from .harness import GridSpec, default_arch, grid_search, replicate
from .net import Architecture
from .optim import TrainConfig, train
from .report import read_results, report
from .seeding import hash64
from .theory import ScheduleExponents, classification_rate, regression_rate

log = logging.getLogger("spdnn")


def parse_index_range(text: str) -> tuple[int, ...]:
    """``"0-3"`` -> (0, 1, 2, 3); ``"0,2,5"`` -> (0, 2, 5)."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty index range {text!r}")
    return tuple(out)


def read_config(path) -> dict[str, str]:
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        k, v = line.split("=", 1)
        cfg[k.strip().replace("-", "_")] = v.strip()
    return cfg


def _train_options(p: argparse.ArgumentParser):
    p.add_argument("--hidden", type=int, nargs="+", default=[100, 100], help="hidden layer widths")
    p.add_argument("--clamp", type=float, default=math.inf, help="output clamp F")
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--patience", type=int, default=30)
    p.add_argument("--max-epochs", type=int, default=1000)
    p.add_argument("--monitor", choices=["train_loss", "penalized"], default="train_loss")


def _config_from(args, loss: str, seed: int) -> TrainConfig:
    return TrainConfig(learning_rate=args.lr, batch_size=args.batch_size, patience=args.patience,
                       max_epochs=args.max_epochs, loss=loss, seed=seed, monitor=args.monitor)


def _grid_options(p):
    p.add_argument("--i-range", type=parse_index_range, default=tuple(range(11)),
                   help="lambda exponents i, e.g. 0-10 or 0,1,2,3")
    p.add_argument("--j-range", type=parse_index_range, default=tuple(range(11)),
                   help="tau exponents j")


def cmd_simulate(args):
    traj = simulate(args.dgp, args.n, args.seed, lags=args.lags, burn_in=args.burn_in)
    if args.out:
        traj.save(args.out)
    else:
        sys.stdout.write(traj.to_table())


def cmd_train(args):
    data = Trajectory.load(args.data)
    arch = Architecture(data.dim, tuple(args.hidden), args.clamp)
    cfg = _config_from(args, data.kind.loss, args.seed).with_penalty(args.lam, args.tau)
    model, hist = train(data, cfg, arch)
    if args.out:
        netmod.save(model, args.out)
    if args.history:
        Path(args.history).write_text(hist.to_table())
    print(f"epochs={hist.epochs} best_epoch={hist.best_epoch} "
          f"train_loss={hist.train_loss[hist.best_epoch - 1]:.6g}")


def cmd_tune(args):
    kind = DgpKind.parse(args.dgp)
    tr = simulate(kind, args.n, hash64(args.seed, "train"), lags=args.lags)
    va = simulate(kind, args.n, hash64(args.seed, "valid"), lags=args.lags)
    arch = default_arch(kind, args.lags, args.hidden)
    grid = GridSpec(args.n, args.i_range, args.j_range)
    res = grid_search(tr, va, grid, _config_from(args, kind.loss, args.seed), arch)
    print("i,j,lambda,tau,validation_loss")
    for row in res.table:
        print(f"{row.i},{row.j},{row.lam:.17g},{row.tau:.17g},{row.score:.17g}")
    print(f"# best i={res.best[0]} j={res.best[1]}")
    if args.out:
        netmod.save(res.net, args.out)


def cmd_replicate(args):
    kind = DgpKind.parse(args.dgp)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    all_results = []
    for n in args.n:
        grid = GridSpec(n, args.i_range, args.j_range)
        res = replicate(kind, n, args.reps, args.base_seed, grid=grid,
                        cfg=_config_from(args, kind.loss, 0),
                        arch=default_arch(kind, args.lags, args.hidden), m=args.m,
                        lags=args.lags, vs_targets=args.vs_targets, workers=args.workers,
                        progress=lambda r, n=n: log.info("n=%d replication %d done", n, r))
        all_results.extend(res)
    files = report(all_results, out)
    for name, path in files.items():
        print(f"{name}: {path}")


def cmd_rates(args):
    exp = ScheduleExponents(nu1=args.nu1, nu2=args.nu2, nu3=args.nu3, nu4=args.nu4,
                            nu5=args.nu5, nu6=args.nu6, kappa=args.kappa, r=args.r,
                            task=args.task)
    fn = regression_rate if args.task == "regression" else classification_rate
    ns = np.unique(np.geomspace(args.n_min, args.n_max, args.points).round().astype(int))
    print("n,bound")
    for n in ns:
        print(f"{n},{fn(float(n), exp):.17g}")


def cmd_report(args):
    files = report(read_results(args.input), args.out_dir)
    for name, path in files.items():
        print(f"{name}: {path}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spdnn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a DGP trajectory")
    p.add_argument("--dgp", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lags", type=int, default=None, help="feature lag order (default: the DGP's)")
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--out", default=None, help="output table (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="train one network on a trajectory table")
    p.add_argument("--data", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="checkpoint path")
    p.add_argument("--history", default=None, help="per-epoch history table path")
    _train_options(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tune", help="grid-search (lambda, tau) on fresh train/validation data")
    p.add_argument("--dgp", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lags", type=int, default=None)
    p.add_argument("--out", default=None, help="checkpoint path for the selected network")
    _grid_options(p)
    _train_options(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("replicate", help="SPDNN vs NPDNN Monte-Carlo study")
    p.add_argument("--dgp", required=True)
    p.add_argument("--n", type=int, nargs="+", default=[250, 500, 1000])
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--m", type=int, default=10_000, help="test trajectory length")
    p.add_argument("--lags", type=int, default=None)
    p.add_argument("--vs-targets", action="store_true",
                   help="score regression against noisy targets instead of the true function")
    p.add_argument("--workers", type=int, default=1)
    _grid_options(p)
    _train_options(p)
    p.set_defaults(func=cmd_replicate)

    p = sub.add_parser("rates", help="print a convergence-rate curve as n,bound")
    p.add_argument("--task", choices=["regression", "classification"], default="regression")
    p.add_argument("--n-max", type=float, required=True)
    p.add_argument("--n-min", type=float, default=10.0)
    p.add_argument("--points", type=int, default=50)
    for name, default in (("nu1", 0.5), ("nu2", 0.5), ("nu3", 1.0), ("nu4", 0.5),
                          ("nu5", 1.0), ("nu6", 0.25), ("kappa", 1.0), ("r", 1.0)):
        p.add_argument(f"--{name}", type=float, default=default)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("report", help="summaries and boxplots from a results table")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)

    for sp in sub.choices.values():
        sp.add_argument("--config", default=None, help="key = value defaults file")
    return parser


def _apply_config(parser, argv):
    """Parse ``argv`` with config-file values installed as subcommand defaults."""
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((tok for tok in argv if tok in subparsers.choices), None)
    if known.config and command:
        sp = subparsers.choices[command]
        actions = {a.dest: a for a in sp._actions}
        for a in sp._actions:
            for opt in a.option_strings:
                actions.setdefault(opt.lstrip("-").replace("-", "_"), a)
        defaults = {}
        for key, raw in read_config(known.config).items():
            if key not in actions:
                parser.error(f"unknown config key {key!r} for '{command}'")
            action = actions[key]
            key = action.dest
            if action.nargs in ("+", "*"):
                conv = action.type or str
                defaults[key] = [conv(v) for v in raw.replace(",", " ").split()]
            elif isinstance(action, argparse._StoreTrueAction):
                defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            else:
                defaults[key] = action.type(raw) if action.type else raw
            action.required = False
        sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    args = _apply_config(parser, argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
