"""Result tables, per-group summaries and static boxplot figures.

Quartiles use linear interpolation between order statistics (numpy's
default ``"linear"`` method). Whiskers reach the most extreme observation
within 1.5 IQR of the box.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import numpy as np

from .dgp import DgpKind
from .harness import NPDNN, SPDNN, ExperimentResult

RESULT_COLUMNS = ["dgp", "n", "replication", "method", "i", "j", "error", "sparsity", "seed"]
SUMMARY_COLUMNS = ["dgp", "n", "method", "count", "min", "q1", "median", "q3", "max",
                   "whisker_low", "whisker_high"]
WHISKER = 1.5


def box_stats(values) -> dict:
    v = np.sort(np.asarray(values, dtype=np.float64))
    if v.size == 0:
        raise ValueError("no values")
    q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75], method="linear")
    iqr = q3 - q1
    lo = v[v >= q1 - WHISKER * iqr].min()
    hi = v[v <= q3 + WHISKER * iqr].max()
    return {
        "count": int(v.size), "min": float(v[0]), "q1": float(q1), "median": float(med),
        "q3": float(q3), "max": float(v[-1]), "whisker_low": float(lo), "whisker_high": float(hi),
        "fliers": v[(v < lo) | (v > hi)],
    }


def _group(results):
    groups = defaultdict(list)
    for r in results:
        groups[(r.dgp.value, r.n, r.method)].append(r.error)
    return groups


def summarize(results) -> list[dict]:
    rows = []
    for (dgp, n, method), errs in sorted(_group(results).items()):
        st = box_stats(errs)
        st.pop("fliers")
        rows.append({"dgp": dgp, "n": n, "method": method, **st})
    return rows


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_results(results, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in results:
            w.writerow([_fmt(x) for x in (r.dgp.value, r.n, r.replication, r.method, r.i, r.j,
                                          float(r.error), r.sparsity, r.seed)])


def read_results(path) -> list[ExperimentResult]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(ExperimentResult(
                method=row["method"], dgp=DgpKind.parse(row["dgp"]), n=int(row["n"]),
                replication=int(row["replication"]), error=float(row["error"]),
                sparsity=int(row["sparsity"]), seed=int(row["seed"]),
                i=int(row["i"]) if row["i"] else None, j=int(row["j"]) if row["j"] else None,
            ))
    return out


def write_summary(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in SUMMARY_COLUMNS])


def plot_boxplots(results, dgp: DgpKind, path):
    """One SVG per DGP: a box per (n, method), boxes drawn from :func:`box_stats`.

    Returns the matplotlib artist dictionary so callers can inspect it.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    groups = _group(r for r in results if r.dgp == dgp)
    ns = sorted({n for (_, n, _) in groups})
    stats, labels, colors = [], [], []
    for n in ns:
        for method, color in ((SPDNN, "#4c72b0"), (NPDNN, "#dd8452")):
            errs = groups.get((dgp.value, n, method))
            if not errs:
                continue
            st = box_stats(errs)
            stats.append({"med": st["median"], "q1": st["q1"], "q3": st["q3"],
                          "whislo": st["whisker_low"], "whishi": st["whisker_high"],
                          "fliers": st["fliers"], "label": f"{method}\nn={n}"})
            colors.append(color)
    ylabel = "empirical excess risk" if dgp.task == "binary" else "empirical L2 error"
    fig, ax = plt.subplots(figsize=(max(4.0, 1.1 * len(stats) + 1.0), 4.0))
    artists = {}
    if stats:
        artists = ax.bxp(stats, patch_artist=True, showfliers=True)
        for patch, c in zip(artists["boxes"], colors):
            patch.set_facecolor(c)
    else:
        ax.text(0.5, 0.5, "no results", ha="center", va="center", transform=ax.transAxes)
    ax.set_title(dgp.value)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return artists


def report(results, out_dir) -> dict[str, Path]:
    """Write results.csv, summary.csv and one boxplot SVG per DGP present.

    With no results every table still gets its header and a figure is
    written for each DGP kind, so downstream tooling always finds its inputs.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    results = list(results)
    files = {"results": out / "results.csv", "summary": out / "summary.csv"}
    write_results(results, files["results"])
    write_summary(summarize(results), files["summary"])
    kinds = sorted({r.dgp for r in results}, key=lambda k: k.value) or list(DgpKind)
    for kind in kinds:
        files[kind.value] = out / f"boxplot_{kind.value}.svg"
        plot_boxplots(results, kind, files[kind.value])
    return files
