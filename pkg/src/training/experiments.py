"""Experiment sweeps: positional-embedding ablation, samples per class, resolution.

Every setting of a sweep becomes one result row. A setting that fails
with an EngineError (an incompatible geometry, a learnable table that is
too short, a class too small for the requested sample count) is reported
as an error row and the sweep moves on.
"""

import logging
import re
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

import pandas as pd

from ..config.schema import RunConfig
from ..core.errors import ConfigError, EngineError
from ..core.tensor import precision
from ..core.types import DatasetName, ExperimentKind, PEKind, dtype_for
from ..data.dataset import DatasetSplit, load_dataset, resize
from ..storage.reports import export_table
from .evaluation import check_compatible, evaluate, load_model
from .trainer import BEST_CHECKPOINT, Trainer, prepare_splits

logger = logging.getLogger(__name__)

PE_KINDS = (PEKind.LEARNABLE, PEKind.SINUSOIDAL, PEKind.NONE)
SAMPLE_COUNTS = (500, 1000, 2000, 3000, 4000, 5000)
RESOLUTIONS = (16, 24, 32, 48, 64)
SWEEP_MODES = ("train", "inference")

# Smallest accuracy difference treated as signal between two rows
MIN_NOISE_MARGIN = 0.01

RESULT_COLUMNS = [
    "experiment",
    "model",
    "setting",
    "seeds",
    "best_val_acc",
    "spread",
    "noise_margin",
    "params",
    "wall_seconds",
    "error",
]


@dataclass
class ExperimentRow:
    """One setting of a sweep.

    Attributes:
        experiment: Sweep kind
        model: Model name
        setting: Swept value (PE kind, samples per class or image size)
        seeds: Space-separated seeds that were run
        best_val_acc: Best validation accuracy over seeds and epochs
        spread: max - min of the per-seed best accuracies
        noise_margin: Accuracy difference below which rows are not distinguishable
        params: Trainable parameter count
        wall_seconds: Elapsed time for the setting (0 when wall time is not recorded)
        error: ``error:<reason>: <message>`` when the setting failed, else empty
    """
    experiment: str
    model: str
    setting: str
    seeds: str = ""
    best_val_acc: float | None = None
    spread: float | None = None
    noise_margin: float | None = None
    params: int | None = None
    wall_seconds: float = 0.0
    error: str = ""

    @property
    def failed(self) -> bool:
        return bool(self.error)

    def record(self, accuracies: list[float]) -> None:
        self.best_val_acc = max(accuracies)
        self.spread = max(accuracies) - min(accuracies)
        self.noise_margin = max(MIN_NOISE_MARGIN, self.spread)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _slug(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")


def _seeds(config: RunConfig) -> list[int]:
    return [config.seed + r for r in range(max(1, config.repeats))]


def _run_config(config: RunConfig, experiment: ExperimentKind, setting: str, seed: int) -> RunConfig:
    checkpoint = Path(config.checkpoint) / experiment.value / _slug(config.model) / _slug(setting) / f"seed-{seed}"
    return config.replace(seed=seed, checkpoint=str(checkpoint), resume=None, metrics=None)


def run_setting(
    experiment: ExperimentKind,
    setting: str,
    config: RunConfig,
    raw: tuple[DatasetSplit, DatasetSplit] | None = None
) -> ExperimentRow:
    """Train ``config`` once per seed and report the best accuracy.

    Args:
        experiment: Sweep kind the row belongs to
        setting: Label of the swept value
        config: Fully specified run (the swept value already applied)
        raw: Dataset loaded once by the caller

    Returns:
        ExperimentRow, with ``error`` set instead of accuracies on failure
    """
    seeds = _seeds(config)
    row = ExperimentRow(experiment.value, config.model, setting, seeds=" ".join(map(str, seeds)))
    start = time.perf_counter()
    accuracies = []
    try:
        for seed in seeds:
            run = _run_config(config, experiment, setting, seed)
            train, test = prepare_splits(run, raw)
            result = Trainer(run, train, test).fit()
            accuracies.append(result.best_val_acc)
            row.params = result.params
    except EngineError as e:
        logger.warning(f"{experiment.value} {config.model} [{setting}] failed: {e}")
        row.error = e.one_line()
    else:
        row.record(accuracies)

    if config.record_wall_time:
        row.wall_seconds = time.perf_counter() - start
    return row


def pe_ablation(
    config: RunConfig,
    models: list[str] | None = None,
    raw: tuple[DatasetSplit, DatasetSplit] | None = None
) -> list[ExperimentRow]:
    """Train every model with learnable, sinusoidal and no positional embedding."""
    rows = []
    for model in models or [config.model]:
        for kind in PE_KINDS:
            run = config.replace(model=model, pos_emb=kind.value)
            rows.append(run_setting(ExperimentKind.PE_ABLATION, kind.value, run, raw))
    return rows


def samples_sweep(
    config: RunConfig,
    models: list[str] | None = None,
    raw: tuple[DatasetSplit, DatasetSplit] | None = None,
    counts: tuple[int, ...] = SAMPLE_COUNTS
) -> list[ExperimentRow]:
    """Train on k samples per class for each k."""
    rows = []
    for model in models or [config.model]:
        for k in counts:
            run = config.replace(model=model, samples_per_class=k)
            rows.append(run_setting(ExperimentKind.SAMPLES_SWEEP, str(k), run, raw))
    return rows


def _inference_sweep(
    config: RunConfig,
    raw: tuple[DatasetSplit, DatasetSplit],
    sizes: tuple[int, ...]
) -> list[ExperimentRow]:
    """Train once at the base size, then score the best checkpoint at every size."""
    experiment = ExperimentKind.RESOLUTION_SWEEP
    base = config.image_size or raw[0].image_size[0]
    seeds = _seeds(config)
    trained: list[Path] = []
    failure = ""
    start = time.perf_counter()
    try:
        for seed in seeds:
            run = _run_config(config, experiment, f"train-{base}", seed)
            train, test = prepare_splits(run, raw)
            Trainer(run, train, test).fit()
            trained.append(Path(run.checkpoint) / BEST_CHECKPOINT)
    except EngineError as e:
        logger.warning(f"{experiment.value} {config.model}: training at {base} failed: {e}")
        failure = e.one_line()
    train_seconds = time.perf_counter() - start

    rows = []
    test_split = raw[1]
    for size in sizes:
        row = ExperimentRow(experiment.value, config.model, str(size), seeds=" ".join(map(str, seeds)))
        start = time.perf_counter()
        if failure:
            row.error = failure
        else:
            accuracies = []
            try:
                with precision(dtype_for(config.precision)):
                    resized = resize(test_split, size)
                    for path in trained:
                        model, _ = load_model(path)
                        check_compatible(model, resized)
                        result = evaluate(model, resized, config.eval_batch_size, config.threads or 1)
                        accuracies.append(result.accuracy)
                        row.params = model.num_parameters()
            except EngineError as e:
                logger.warning(f"{experiment.value} {config.model} at {size}: {e}")
                row.error = e.one_line()
            else:
                row.record(accuracies)
        if config.record_wall_time:
            row.wall_seconds = train_seconds + time.perf_counter() - start
        rows.append(row)
    return rows


def resolution_sweep(
    config: RunConfig,
    models: list[str] | None = None,
    raw: tuple[DatasetSplit, DatasetSplit] | None = None,
    sizes: tuple[int, ...] = RESOLUTIONS
) -> list[ExperimentRow]:
    """Accuracy as a function of input resolution.

    In ``train`` mode every size is trained from scratch. In ``inference``
    mode the model is trained once at the base size and its best
    checkpoint is evaluated on the test split resized to each size.

    Raises:
        ConfigError: Unknown sweep mode
    """
    if config.sweep_mode not in SWEEP_MODES:
        raise ConfigError(f"sweep mode must be one of {', '.join(SWEEP_MODES)}, got '{config.sweep_mode}'")
    if raw is None:
        raw = load_dataset(config.dataset_name, config.data_dir)

    rows = []
    for model in models or [config.model]:
        run = config.replace(model=model)
        if config.sweep_mode == "inference":
            rows.extend(_inference_sweep(run, raw, sizes))
            continue
        for size in sizes:
            sized = run.replace(image_size=size)
            rows.append(run_setting(ExperimentKind.RESOLUTION_SWEEP, str(size), sized, raw))
    return rows


def run_experiment(
    kind: ExperimentKind | str,
    config: RunConfig,
    models: list[str] | None = None
) -> pd.DataFrame:
    """Run a sweep, write the result CSV (and plot) and return the table.

    The dataset is loaded once and shared by every setting.
    """
    kind = ExperimentKind(kind)
    raw = load_dataset(config.dataset_name, config.data_dir)
    logger.info(
        f"Experiment {kind.value} on {config.dataset}: models {models or [config.model]}, "
        f"{config.epochs} epochs, {config.repeats} seed(s)"
    )

    if kind == ExperimentKind.PE_ABLATION:
        rows = pe_ablation(config, models, raw)
    elif kind == ExperimentKind.SAMPLES_SWEEP:
        rows = samples_sweep(config, models, raw, _sample_counts(raw[0]))
    else:
        rows = resolution_sweep(config, models, raw)

    failed = sum(row.failed for row in rows)
    if failed:
        logger.warning(f"{failed} of {len(rows)} settings reported errors")
    table = export_table([row.to_dict() for row in rows], config.out, columns=RESULT_COLUMNS)
    if config.plot:
        plot_results(table, config.plot, title=f"{kind.value} ({config.dataset})")
    return table


def _sample_counts(train: DatasetSplit) -> tuple[int, ...]:
    """The standard sweep, capped at what the smallest class holds.

    MNIST-style splits have about 6000 samples per class and CIFAR-10
    exactly 5000; CIFAR-100 (500 per class) keeps only the first point.
    """
    if train.name == DatasetName.CIFAR100:
        return SAMPLE_COUNTS[:1]
    return SAMPLE_COUNTS


def plot_results(table: pd.DataFrame, output_path: str | Path, title: str = "") -> None:
    """Accuracy against setting, one line per model; error rows are skipped."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        ok = table[table["error"].fillna("") == ""]
        if ok.empty:
            logger.warning("No successful rows to plot")
            return
        settings = list(dict.fromkeys(table["setting"].astype(str)))
        positions = {s: i for i, s in enumerate(settings)}

        plt.figure(figsize=(8, 5))
        for model, group in ok.groupby("model", sort=False):
            xs = [positions[str(s)] for s in group["setting"]]
            ys = group["best_val_acc"].astype(float) * 100.0
            margins = group["noise_margin"].astype(float) * 100.0
            plt.errorbar(xs, ys, yerr=margins, marker="o", capsize=3, label=model)

        plt.xticks(range(len(settings)), settings)
        plt.xlabel("Setting")
        plt.ylabel("Top-1 accuracy (%)")
        plt.title(title)
        plt.grid(True, alpha=0.3)
        plt.legend()
        plt.tight_layout()
        Path(output_path).parent.mkdir(parents=True, exist_ok=True)
        plt.savefig(output_path, dpi=150)
        plt.close()

        logger.info(f"Experiment plot saved to {output_path}")

    except ImportError:
        logger.warning("matplotlib not available for plotting")
