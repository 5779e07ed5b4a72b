"""``qcnn`` command line: image filtering, training, evaluation and shift compilation.

Every command prints JSON. Failures print a single JSON object with an
``error`` field on stderr and exit with

* 2 for configuration problems (bad flags, bad masks),
* 3 for data problems (missing or malformed files),
* 4 for numerical failures (for example a zero-probability postselection).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from qcnn.errors import ConfigError, DataError, DimensionError, ImageFormatError, ZeroProbabilityError
from qcnn.imaging import load_image, pad_to_power_of_two, save_image
from qcnn.lcu import PRESETS, SDAGGER, UNCOMPUTE, as_mask, filter_image
from qcnn.oracle import cyclic_filter

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
DEFAULT_SIZES = {"binary": (500, 200), "tenclass": (2000, 500)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError([message])


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def cmd_filter(args) -> dict:
    try:
        mask = as_mask(args.mask)
    except FileNotFoundError:
        raise ConfigError([f"mask: no preset or file named {args.mask!r}"]) from None
    except ValueError as exc:
        raise ConfigError([f"mask: {exc}"]) from None
    try:
        image = load_image(args.input, args.format, apply_sidecar=args.apply_sidecar)
    except FileNotFoundError as exc:
        raise DataError(str(exc)) from None
    rows, cols = image.shape
    padded = image
    if rows != cols or not _is_power_of_two(rows) or rows < 4:
        padded = pad_to_power_of_two(image)
    out, outcome = filter_image(padded, mask, args.uncompute)
    err = float(np.max(np.abs(out - cyclic_filter(padded, mask.w))))
    report = {
        "input": str(args.input),
        "mask": mask.w.tolist(),
        "uncompute": args.uncompute,
        "padded_shape": list(padded.shape),
        "success_probability": float(outcome.success_probability),
        "N_c": float(np.linalg.norm(mask.w)),
        "rescale": float(outcome.rescale),
        "max_abs_error_vs_classical_oracle": err,
    }
    if args.output:
        save_image(args.output, out[:rows, :cols])
        report["output"] = str(args.output)
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    return report


def _train_config(args):
    from qcnn.training import TrainConfig

    train_size, test_size = DEFAULT_SIZES.get(args.task, DEFAULT_SIZES["binary"])
    return TrainConfig(
        task=args.task,
        epochs=args.epochs,
        images_per_epoch=args.batch,
        learning_rate=args.lr,
        minibatch=args.minibatch,
        noise_p=args.noise_p,
        repeats=args.repeats,
        seed=args.seed,
        uncompute=args.uncompute,
        train_size=args.train_size or train_size,
        test_size=args.test_size or test_size,
    ).validate()


def _load_data(args, task):
    from qcnn.training import BINARY_LABELS, load_split

    labels = BINARY_LABELS if task == "binary" else None
    return (load_split("train", args.data_dir, labels), load_split("test", args.data_dir, labels))


def cmd_train(args) -> dict:
    from dataclasses import asdict

    from qcnn.training import envelope, save_params, train, train_repeats

    config = _train_config(args)
    train_data, test_data = _load_data(args, config.task)
    if config.repeats == 1:
        runs = [train(config, train_data, test_data)]
    else:
        runs = train_repeats(config, train_data, test_data)
    out = Path(args.out) if args.out else None
    if out is not None:
        with open(out, "w") as fh:
            for r, (_, metrics) in enumerate(runs):
                for row in metrics.history:
                    fh.write(json.dumps({"run": r, **row}) + "\n")
    summary = {"config": asdict(config), "final": [m.final for _, m in runs]}
    if len(runs) > 1:
        env = envelope([m for _, m in runs])
        summary["envelope_final"] = env[-1]
        if args.envelope:
            Path(args.envelope).write_text("".join(json.dumps(e) + "\n" for e in env))
    if args.params:
        params, metrics = runs[0]
        save_params(args.params, params, {
            "config": asdict(config),
            "run_seed": metrics.seed,
            "test_acc": metrics.final.get("test_acc"),
            "train_acc": metrics.final.get("train_acc"),
        })
        summary["params"] = str(args.params)
    return summary


def cmd_eval(args) -> dict:
    from qcnn.training import NoiseChannel, TrainConfig, evaluate, filter_task, load_params, select_subset

    params, saved = load_params(args.params)
    cfg = TrainConfig(**saved["config"]) if "config" in saved else TrainConfig(task=params.task)
    if "run_seed" in saved:
        cfg.seed = saved["run_seed"]
    if args.test_size:
        cfg.test_size = args.test_size
    if args.noise_p is not None:
        cfg.noise_p = args.noise_p
    cfg.validate()
    train_data, test_data = _load_data(args, cfg.task)
    # replay the subset selection used at training time
    rng = np.random.default_rng([cfg.seed, 0])
    select_subset(filter_task(train_data, cfg.task), cfg.train_size, rng)
    test_set = select_subset(filter_task(test_data, cfg.task), cfg.test_size, rng)
    noise = NoiseChannel(cfg.noise_p, cfg.seed) if cfg.noise_p > 0 else None
    acc = evaluate(params, test_set, noise, split=1)
    report = {"params": str(args.params), "test_acc": acc, "num_images": len(test_set)}
    if saved.get("test_acc") is not None:
        report["saved_test_acc"] = saved["test_acc"]
        report["matches_saved"] = acc == saved["test_acc"]
    return report


def cmd_decompose_shift(args) -> dict | str:
    from qcnn.shifts import compile_shift, to_textlist

    if args.qubits < 1:
        raise ConfigError([f"qubits: must be >= 1, got {args.qubits}"])
    circ = compile_shift(args.qubits, args.direction)
    gates = circ.expanded if args.expand else circ.gates
    if args.emit == "textlist":
        return to_textlist(gates)
    return {
        "qubits": args.qubits,
        "direction": args.direction,
        "logical_gates": len(circ.gates),
        "basic_gate_count": circ.basic_gate_count,
        "counts_by_kind": circ.counts_by_kind(),
    }


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qcnn", description="Quantum convolutional filtering and QCNN training.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("filter", help="apply a 3x3 mask to an image through the quantum pipeline")
    f.add_argument("input", help="CSV or PGM image")
    f.add_argument("--mask", default="smooth", help=f"preset ({', '.join(PRESETS)}) or a 3x3 text file")
    f.add_argument("--output", "-o", help="output image (.csv is lossless, .pgm writes a scale sidecar)")
    f.add_argument("--report", help="also write the JSON report here")
    f.add_argument("--format", choices=("csv", "pgm"), help="input format if the suffix is ambiguous")
    f.add_argument("--apply-sidecar", action="store_true", help="undo a PGM sidecar scale on input")
    f.add_argument("--uncompute", choices=UNCOMPUTE, default=SDAGGER)
    f.set_defaults(func=cmd_filter)

    def common(p, noise_default):
        p.add_argument("--data-dir", help="folder with MNIST IDX files (default: $QCNN_DATA_DIR or data/mnist)")
        p.add_argument("--test-size", type=int)
        p.add_argument("--noise-p", type=float, default=noise_default)

    t = sub.add_parser("train", help="train a QCNN on MNIST")
    t.add_argument("--task", default="binary", help="binary (digits 1 vs 8) or tenclass")
    t.add_argument("--epochs", type=int, default=50)
    t.add_argument("--batch", type=int, default=100, help="images sampled per epoch")
    t.add_argument("--minibatch", type=int, default=1, help="images averaged per parameter update")
    t.add_argument("--lr", type=float, default=0.01)
    t.add_argument("--repeats", type=int, default=1)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--train-size", type=int)
    t.add_argument("--uncompute", default=SDAGGER)
    t.add_argument("--out", help="metrics JSONL, one object per epoch and run")
    t.add_argument("--envelope", help="per-epoch mean/min/max across repeats (JSONL)")
    t.add_argument("--params", help="save the first run's parameters as JSON")
    common(t, 0.0)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate saved parameters on the test split")
    e.add_argument("params", help="parameter JSON written by 'train --params'")
    common(e, None)  # None: reuse the training noise level
    e.set_defaults(func=cmd_eval)

    d = sub.add_parser("decompose-shift", help="compile a cyclic increment/decrement to gates")
    d.add_argument("--qubits", type=int, required=True)
    d.add_argument("--direction", choices=("inc", "dec"), default="inc")
    d.add_argument("--emit", choices=("textlist", "summary"), default="summary")
    d.add_argument("--expand", action="store_true", help="emit basic gates instead of logical MCX gates")
    d.set_defaults(func=cmd_decompose_shift)
    return ap


def _fail(code: int, kind: str, message: str, **extra) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code, **extra}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        result = args.func(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc), problems=exc.problems)
    except (DataError, ImageFormatError, FileNotFoundError, IsADirectoryError) as exc:
        return _fail(EXIT_DATA, "data", str(exc))
    except (ZeroProbabilityError, DimensionError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return _fail(EXIT_NUMERIC, "numerical", str(exc))
    if isinstance(result, str):
        print(result)
    else:
        print(json.dumps(result, indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
