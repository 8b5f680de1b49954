"""Command-line front end: train, eval, sweep, visualize.

Every command emits line-oriented JSON records on stdout (one self-contained
record per line) so runs can be diffed, grepped, and plotted without the
tool. Flags mirror the config fields; a JSON config file can seed them and
explicit flags win. Exit codes: 0 on success, otherwise the failing error
class's code (see ``csnet.errors``).
"""

import argparse
import json
import sys

from .config import ExperimentConfig
from .errors import ConfigurationError, CsnetError
from .model_io import load_model, save_model
from .pipeline import evaluate_model, train_model
from .visualize import write_filter_images

def _widths(text: str):
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad stage widths {text!r}") from exc


# (flag, config field, parser, help)
CONFIG_FLAGS = [
    ("--method", "method", str, "filter learning method: cs | pca | random"),
    ("--stage-widths", "stage_widths", _widths, "filters per stage, e.g. 8,8"),
    ("--k1", "k1", int, "patch/filter height"),
    ("--k2", "k2", int, "patch/filter width"),
    ("--stride", "stride", int, "patch sampling stride during learning"),
    ("--k-sparsity", "k_sparsity", int, "recovery sparsity K (default: k1)"),
    ("--m-measurements", "m_measurements", int, "measurement count M (default: ceil(d/2))"),
    ("--block-h", "block_h", int, "histogram block height"),
    ("--block-w", "block_w", int, "histogram block width"),
    ("--overlap-ratio", "overlap_ratio", float, "block overlap ratio in [0,1)"),
    ("--noise-variance", "noise_variance", float, "Gaussian pixel-noise variance"),
    ("--svm-c", "svm_c", float, "SVM trade-off parameter C"),
    ("--svm-tol", "svm_tol", float, "SVM convergence tolerance"),
    ("--svm-max-iter", "svm_max_iter", int, "max SVM coordinate-descent sweeps"),
    ("--omp-tol", "omp_tol", float, "OMP relative residual tolerance (0 = run K iterations)"),
    ("--seed", "seed", int, "master seed for every random stream"),
    ("--split-mode", "split_mode", str, "pooled | pooled-swapped | files"),
    ("--train-limit", "train_limit", int, "cap the training set size"),
    ("--test-limit", "test_limit", int, "cap the test set size"),
    ("--scale", "scale", float, "recorded in the config; no pipeline effect"),
    ("--train-images", "train_images", str, "IDX image file (train)"),
    ("--train-labels", "train_labels", str, "IDX label file (train)"),
    ("--test-images", "test_images", str, "IDX image file (test)"),
    ("--test-labels", "test_labels", str, "IDX label file (test)"),
    ("--chunk-size", "chunk_size", int, "images per processing chunk"),
]


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON config file (flags override it)")
    for flag, dest, typ, help_text in CONFIG_FLAGS:
        parser.add_argument(flag, dest=dest, type=typ, default=None, help=help_text)


def _resolve_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        with open(args.config) as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"{args.config}: invalid JSON ({exc})") from exc
    for _, dest, _, _ in CONFIG_FLAGS:
        value = getattr(args, dest, None)
        if value is not None:
            data[dest] = value
    return ExperimentConfig.from_dict(data)


class _Emitter:
    def __init__(self, metrics_path=None):
        self.metrics_path = metrics_path

    def emit(self, record: dict):
        line = json.dumps(record, sort_keys=True)
        print(line)
        if self.metrics_path:
            with open(self.metrics_path, "a") as f:
                f.write(line + "\n")


def _cmd_train(args) -> int:
    config = _resolve_config(args)
    emitter = _Emitter(args.metrics)
    model, metrics = train_model(config)
    save_model(model, args.model)
    metrics["model_path"] = str(args.model)
    emitter.emit(metrics)
    return 0


def _cmd_eval(args) -> int:
    emitter = _Emitter(args.metrics)
    model = load_model(args.model)
    overrides = {}
    for _, dest, _, _ in CONFIG_FLAGS:
        value = getattr(args, dest, None)
        if value is not None and dest != "noise_variance":
            overrides[dest] = value
    report, metrics = evaluate_model(
        model,
        on=args.on,
        noise_variance=args.noise_variance,
        config_overrides=overrides or None,
    )
    metrics["model_path"] = str(args.model)
    emitter.emit(metrics)
    return 0


_SWEEP_AXES = ("L1", "L2", "layers", "noise")


def _sweep_config(base: ExperimentConfig, axis: str, value: float) -> ExperimentConfig:
    if axis == "L1":
        widths = (int(value),) + base.stage_widths[1:]
        return base.replace(stage_widths=widths)
    if axis == "L2":
        if len(base.stage_widths) < 2:
            raise ConfigurationError("L2 sweep needs a config with >= 2 stages")
        widths = (base.stage_widths[0], int(value)) + base.stage_widths[2:]
        return base.replace(stage_widths=widths)
    if axis == "layers":
        depth = int(value)
        if not 1 <= depth <= len(base.stage_widths):
            raise ConfigurationError(
                f"layers value {depth} outside 1..{len(base.stage_widths)}"
            )
        return base.replace(stage_widths=base.stage_widths[:depth])
    return base.replace(noise_variance=float(value))


def _cmd_sweep(args) -> int:
    base = _resolve_config(args)
    emitter = _Emitter(args.metrics)
    values = [float(v) for v in args.values.split(",")]
    failures = 0
    for value in values:
        row = {"record": "sweep_row", "axis": args.axis, "value": value}
        try:
            config = _sweep_config(base, args.axis, value)
            model, train_metrics = train_model(config)
            report, _ = evaluate_model(model, on="test")
            row.update(
                status="ok",
                error_rate=report.error_rate,
                train_error=train_metrics["train_error"],
                n_test=report.n_test,
            )
        except (CsnetError, OSError) as exc:
            failures += 1
            row.update(
                status="error",
                error=str(exc),
                phase=getattr(exc, "phase", None),
            )
        emitter.emit(row)
    return 1 if failures else 0


def _cmd_visualize(args) -> int:
    emitter = _Emitter(None)
    model = load_model(args.model)
    written = write_filter_images(model.bank, args.out)
    emitter.emit(
        {
            "record": "visualize",
            "model_path": str(args.model),
            "out_dir": str(args.out),
            "files_written": len(written),
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csnet",
        description="Compressive-sensing filter-bank network: train, "
        "evaluate, sweep parameters, visualize filters.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="learn filters + SVM, write a model file")
    _add_config_flags(p_train)
    p_train.add_argument("--model", required=True, help="output model path")
    p_train.add_argument("--metrics", help="append JSON records to this file")
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a model file on a split")
    _add_config_flags(p_eval)
    p_eval.add_argument("--model", required=True, help="model file to evaluate")
    p_eval.add_argument("--on", choices=("train", "test"), default="test")
    p_eval.add_argument("--metrics", help="append JSON records to this file")
    p_eval.set_defaults(func=_cmd_eval)

    p_sweep = sub.add_parser(
        "sweep", help="train/eval once per axis value, emit one row per run"
    )
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--axis", choices=_SWEEP_AXES, required=True)
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--metrics", help="append JSON records to this file")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_vis = sub.add_parser("visualize", help="write filter PGMs from a model file")
    p_vis.add_argument("--model", required=True)
    p_vis.add_argument("--out", required=True, help="output directory")
    p_vis.set_defaults(func=_cmd_visualize)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CsnetError as exc:
        phase = getattr(exc, "phase", None)
        tag = f"[{phase}] " if phase else ""
        print(f"csnet: error {tag}{exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"csnet: error {exc}", file=sys.stderr)
        return 7


if __name__ == "__main__":
    sys.exit(main())
