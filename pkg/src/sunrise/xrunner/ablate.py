"""Ablation grids: one training run per (cell, seed) plus a robust summary."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

from .config import RunConfig, write_config
from .train import read_metrics, run_training

AXES = ("scheme", "ucb", "N", "updates-vs-ensemble")
RUN_COLUMNS = ["axis", "cell", "seed", "status", "final_return", "auc", "steps_to_threshold",
               "metrics", "error"]
SUMMARY_COLUMNS = ["axis", "cell", "runs", "failed", "median_final", "iqr_final", "median_auc",
                   "iqr_auc", "median_steps_to_threshold", "mean_final", "std_final"]


def grid_cells(base: RunConfig, axis: str, values=None) -> list[tuple[str, RunConfig]]:
    """Named configurations along one ablation axis."""
    if axis == "scheme":
        values = values or ["uniform", "random", "ensemble_std"]
        return [(v, base.replace(learner="ensemble", scheme=v)) for v in values]
    if axis == "ucb":
        values = values or ["ucb", "random"]
        return [(v, base.replace(learner="ensemble", inference=v)) for v in values]
    if axis == "N":
        values = [int(v) for v in (values or [1, 5])]
        return [(f"N{v}", base.replace(learner="ensemble", ensemble_n=v)) for v in values]
    if axis == "updates-vs-ensemble":
        # values: hidden width of the single agent; it takes 5 updates per step
        widths = [int(v) for v in (values or [2 * max(base.hidden)])]
        cells = [("ensemble", base.replace(learner="ensemble"))]
        for w in widths:
            cells.append((f"single_h{w}_x5",
                          base.replace(learner="single", updates_per_step=5,
                                       hidden=[w] * len(base.hidden))))
        return cells
    raise ValueError(f"axis must be one of {AXES}, got {axis!r}")


def summarize_curve(steps, returns, threshold: float | None):
    """Final return, normalised area under the curve, and first step reaching ``threshold``."""
    steps, returns = np.asarray(steps, float), np.asarray(returns, float)
    if steps.size == 0:
        return float("nan"), float("nan"), float("nan")
    final = float(returns[-1])
    if steps.size > 1:
        auc = float(trapezoid(returns, steps) / (steps[-1] - steps[0]))
    else:
        auc = final
    hit = float("nan")
    if threshold is not None:
        idx = np.flatnonzero(returns >= threshold)
        hit = float(steps[idx[0]]) if idx.size else float("inf")
    return final, auc, hit


def _iqr(x):
    if len(x) == 0:
        return float("nan")
    q75, q25 = np.percentile(x, [75, 25])
    return float(q75 - q25)


def _median(x):
    return float(np.median(x)) if len(x) else float("nan")


def run_ablation_grid(base: RunConfig, axis: str, seeds, out_dir, values=None,
                      threshold: float | None = None) -> Path:
    """Run every cell for every seed; failures are recorded and the grid continues.

    Writes ``runs.csv`` (one row per cell and seed), ``summary.csv`` (per-cell
    median and IQR of final return and AUC) and per-run metric files under
    ``<out_dir>/<cell>/``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = grid_cells(base, axis, values)
    records = []
    for name, cfg in cells:
        cell_dir = out_dir / name
        cell_dir.mkdir(exist_ok=True)
        write_config(cfg, cell_dir / "config.json")
        for seed in seeds:
            path = cell_dir / f"seed_{seed}.csv"
            rec = {"axis": axis, "cell": name, "seed": seed, "metrics": str(path.relative_to(out_dir))}
            try:
                run_training(cfg, path, [seed])
                cols = read_metrics(path).get(seed, {"step": [], "eval_return": []})
                final, auc, hit = summarize_curve(cols["step"], cols["eval_return"], threshold)
                rec.update(status="ok", final_return=final, auc=auc, steps_to_threshold=hit,
                           error="")
            except Exception as exc:  # noqa: BLE001 - recorded per cell by design
                rec.update(status="failed", final_return=float("nan"), auc=float("nan"),
                           steps_to_threshold=float("nan"),
                           error=f"{type(exc).__name__}: {str(exc).splitlines()[0]}")
            records.append(rec)
    _write(out_dir / "runs.csv", RUN_COLUMNS, records)
    _write(out_dir / "summary.csv", SUMMARY_COLUMNS, summarize_records(records, cells, axis))
    return out_dir


def summarize_records(records, cells, axis):
    rows = []
    for name, _ in cells:
        ok = [r for r in records if r["cell"] == name and r["status"] == "ok"]
        final = [r["final_return"] for r in ok]
        auc = [r["auc"] for r in ok]
        hit = [r["steps_to_threshold"] for r in ok]
        rows.append({
            "axis": axis, "cell": name,
            "runs": sum(r["cell"] == name for r in records),
            "failed": sum(r["cell"] == name and r["status"] != "ok" for r in records),
            "median_final": _median(final), "iqr_final": _iqr(final),
            "median_auc": _median(auc), "iqr_auc": _iqr(auc),
            "median_steps_to_threshold": _median(hit),
            "mean_final": float(np.mean(final)) if final else float("nan"),
            "std_final": float(np.std(final)) if final else float("nan"),
        })
    return rows


def _write(path, columns, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in columns])


def read_summary(path) -> dict[str, dict[str, float]]:
    with open(path, encoding="utf-8", newline="") as fh:
        out = {}
        for row in csv.DictReader(fh):
            out[row["cell"]] = {k: (float(v) if k not in ("axis", "cell") else v)
                                for k, v in row.items()}
    return out
