#!/usr/bin/env python3
"""CCT Engine - command-line entry point.

Subcommands:
    train        train a model, writing checkpoints and a metrics CSV
    eval         top-1 accuracy of a checkpoint on a dataset's test split
    stats        parameter / MAC report for named models
    gradcheck    finite-difference check of every kernel
    experiment   pe-ablation, samples-sweep or resolution-sweep
"""

import argparse
import json
import logging
import os
import sys

_BLAS_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
)


def _requested_threads(argv: list[str]) -> str | None:
    for i, arg in enumerate(argv):
        if arg == "--threads" and i + 1 < len(argv):
            return argv[i + 1]
        if arg.startswith("--threads="):
            return arg.split("=", 1)[1]
    return os.environ.get("CCT_THREADS")


# BLAS reads its thread count when numpy is first imported
_threads = _requested_threads(sys.argv[1:])
if _threads and _threads.isdigit():
    for _var in _BLAS_THREAD_VARS:
        os.environ.setdefault(_var, _threads)

from src.config import ConfigManager, RunConfig  # noqa: E402
from src.core import DataIOError, EngineError, precision  # noqa: E402
from src.core.types import DatasetName, ExperimentKind, PEKind, Pooling, dtype_for  # noqa: E402
from src.data import load_dataset, resize  # noqa: E402
from src.training import (  # noqa: E402
    Trainer,
    check_compatible,
    collect_stats,
    evaluate,
    format_stats,
    format_table,
    load_model,
    run_experiment,
    run_suite,
    write_stats,
)

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
DEFAULT_STATS_REPORT = "model_stats.jsonl"

logger = logging.getLogger("cct_engine")


def setup_logging(verbose: bool = False, log_file: str | None = None) -> None:
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------

def _common_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="key=value (or .json) configuration file")
    parent.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    parent.add_argument("--log-file", dest="log_file", default=None, help="also log to this file")
    parent.add_argument("--threads", type=int, default=None, help="BLAS and evaluation threads")
    return parent


def _run_flags() -> argparse.ArgumentParser:
    """Flags that map one-to-one onto RunConfig keys (None = not given)."""
    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--model", default=None, help="e.g. cct-7/3x2, cvt-7/4, vit-lite-7/4, vit-12/16")
    run.add_argument("--dataset", default=None, choices=[d.value for d in DatasetName])
    run.add_argument("--data-dir", dest="data_dir", default=None)
    run.add_argument("--epochs", type=int, default=None)
    run.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    run.add_argument("--lr", type=float, default=None)
    run.add_argument("--min-lr", dest="min_lr", type=float, default=None)
    run.add_argument("--lr-per-epoch", dest="lr_per_epoch", action="store_true", default=None)
    run.add_argument("--weight-decay", dest="weight_decay", type=float, default=None)
    run.add_argument("--warmup-epochs", dest="warmup_epochs", type=int, default=None)
    run.add_argument("--label-smoothing", dest="label_smoothing", type=float, default=None)
    run.add_argument("--pos-emb", dest="pos_emb", default=None, choices=[p.value for p in PEKind])
    run.add_argument("--pool", default=None, choices=[p.value for p in Pooling])
    run.add_argument("--tuned", action="store_true", default=None, help="tuned dropout / stochastic depth")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--image-size", dest="image_size", type=int, default=None)
    run.add_argument("--samples-per-class", dest="samples_per_class", type=int, default=None)
    run.add_argument("--no-augment", dest="augment", action="store_false", default=None)
    run.add_argument("--checkpoint", default=None, help="checkpoint directory")
    run.add_argument("--resume", default=None, help="checkpoint file to resume from")
    run.add_argument("--metrics", default=None, help="metrics CSV (default <checkpoint>/metrics.csv)")
    run.add_argument("--no-wall-time", dest="record_wall_time", action="store_false", default=None)
    run.add_argument("--eval-batch-size", dest="eval_batch_size", type=int, default=None)
    run.add_argument("--precision", type=int, default=None, choices=[32, 64])
    return run


RUN_KEYS = (
    "model", "dataset", "data_dir", "epochs", "batch_size", "lr", "min_lr", "lr_per_epoch",
    "weight_decay", "warmup_epochs", "label_smoothing", "pos_emb", "pool", "tuned", "seed",
    "image_size", "samples_per_class", "augment", "checkpoint", "resume", "metrics",
    "record_wall_time", "eval_batch_size", "precision", "repeats", "out", "sweep_mode", "plot",
    "threads", "log_file",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cct-engine", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()
    run = _run_flags()

    sub.add_parser("train", parents=[common, run], help="train a model")

    ev = sub.add_parser("eval", parents=[common, run], help="evaluate a checkpoint")
    ev.add_argument("checkpoint_file", help="checkpoint written by train")

    stats = sub.add_parser("stats", parents=[common], help="parameter and MAC report")
    stats.add_argument("--model", action="append", default=None,
                       help="model name (repeatable; default: the comparison table)")
    stats.add_argument("--image-size", dest="image_size", type=int, default=32)
    stats.add_argument("--classes", type=int, default=10)
    stats.add_argument("--channels", type=int, default=3)
    stats.add_argument("--out", default=DEFAULT_STATS_REPORT, help="JSON Lines report")

    grad = sub.add_parser("gradcheck", parents=[common], help="finite-difference gradient suite")
    grad.add_argument("--seed", type=int, default=0)

    exp = sub.add_parser("experiment", parents=[common, run], help="run a sweep")
    exp.add_argument("kind", choices=[k.value for k in ExperimentKind])
    exp.add_argument("--models", default=None, help="comma-separated model list (default: --model)")
    exp.add_argument("--repeats", type=int, default=None, help="seeds per setting, best reported")
    exp.add_argument("--out", default=None, help="results CSV")
    exp.add_argument("--sweep-mode", dest="sweep_mode", default=None, choices=["train", "inference"])
    exp.add_argument("--plot", default=None, help="experiment plot (PNG)")
    return parser


def resolve_run_config(args: argparse.Namespace) -> RunConfig:
    flags = {key: getattr(args, key, None) for key in RUN_KEYS}
    config = ConfigManager(args.config).resolve(flags)
    if config.log_file and not args.log_file:
        # log file named by the config file or environment
        setup_logging(args.verbose, config.log_file)
    return config


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------

def cmd_train(args: argparse.Namespace) -> int:
    config = resolve_run_config(args)
    result = Trainer(config).fit()
    print(json.dumps(result.to_dict(), sort_keys=True))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    config = resolve_run_config(args)
    with precision(dtype_for(config.precision)):
        model, checkpoint = load_model(args.checkpoint_file)
        _, test = load_dataset(config.dataset_name, config.data_dir)
        if config.image_size is not None:
            test = resize(test, config.image_size)
        check_compatible(model, test)
        result = evaluate(model, test, config.eval_batch_size, config.threads or 1)
    report = {"model": checkpoint.model_name, "epoch": checkpoint.epoch, "dataset": test.name.value}
    report.update(result.to_dict())
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    stats = collect_stats(args.model, args.image_size, args.classes, args.channels)
    print(format_stats(stats))
    write_stats(stats, args.out)
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    outcomes = run_suite(seed=args.seed)
    print(format_table(outcomes))
    return 0 if all(o.passed for o in outcomes) else 1


def cmd_experiment(args: argparse.Namespace) -> int:
    config = resolve_run_config(args)
    models = [m.strip() for m in args.models.split(",") if m.strip()] if args.models else None
    table = run_experiment(args.kind, config, models)
    print(table.to_string(index=False))
    return 0


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "stats": cmd_stats,
    "gradcheck": cmd_gradcheck,
    "experiment": cmd_experiment,
}


def main(argv: list[str] | None = None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose, args.log_file)
    try:
        return COMMANDS[args.command](args)
    except EngineError as e:
        logger.debug("command failed", exc_info=True)
        print(e.one_line(), file=sys.stderr)
        return e.exit_code
    except OSError as e:
        logger.debug("command failed", exc_info=True)
        print(DataIOError(str(e), cause=e).one_line(), file=sys.stderr)
        return DataIOError.exit_code
    except KeyboardInterrupt:
        print("error:interrupted: stopped by user", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
