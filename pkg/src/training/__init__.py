"""Training, evaluation, experiment sweeps, gradient checks and size reports."""

from .evaluation import EvalResult, accuracy, check_compatible, evaluate, load_model
from .experiments import (
    RESULT_COLUMNS,
    ExperimentRow,
    pe_ablation,
    plot_results,
    resolution_sweep,
    run_experiment,
    run_setting,
    samples_sweep,
)
from .gradcheck_suite import GradCheckCase, GradCheckOutcome, default_cases, format_table, run_suite
from .stats import ModelStats, collect_stats, format_stats, model_stats, write_stats
from .trainer import BEST_CHECKPOINT, LAST_CHECKPOINT, Trainer, TrainResult, prepare_splits

__all__ = [
    "Trainer",
    "TrainResult",
    "prepare_splits",
    "LAST_CHECKPOINT",
    "BEST_CHECKPOINT",
    "EvalResult",
    "accuracy",
    "evaluate",
    "check_compatible",
    "load_model",
    "ExperimentRow",
    "RESULT_COLUMNS",
    "run_setting",
    "pe_ablation",
    "samples_sweep",
    "resolution_sweep",
    "run_experiment",
    "plot_results",
    "GradCheckCase",
    "GradCheckOutcome",
    "default_cases",
    "run_suite",
    "format_table",
    "ModelStats",
    "model_stats",
    "collect_stats",
    "format_stats",
    "write_stats",
]
