"""Experiment harness: configs, training runs, toy regression, ablations, plots."""

from .ablate import AXES, grid_cells, read_summary, run_ablation_grid, summarize_curve
from .config import RunConfig, resolve_seeds
from .plot import curve_band, emit_plot
from .toyreg import ToyRegressionResult, run_toy_regression
from .train import RunError, evaluate, make_env, read_metrics, run_training, train_seed

__all__ = [
    "AXES", "RunConfig", "RunError", "ToyRegressionResult", "curve_band", "emit_plot",
    "evaluate", "grid_cells", "make_env", "read_metrics", "read_summary", "resolve_seeds",
    "run_ablation_grid", "run_toy_regression", "run_training", "summarize_curve", "train_seed",
]
