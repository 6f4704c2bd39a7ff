"""Command-line front end.

Subcommands: ``generate`` (write task spike files), ``train`` (run one
seeded training run and write checkpoint/events/metrics), ``eval`` (frozen
scoring of a checkpoint) and ``cross-validate``. All outputs are
deterministic functions of (config, seed).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import experiments
from .config import ExperimentConfig, load_config, load_preset, PRESET_NAMES
from .encoding import GrfEncoder, encode_dataset, load_iris_data
from .errors import OdesaError
from .network import Network
from .spike_io import load_dataset, save_dataset

GENERATE_TASKS = (
    "morse-names",
    "morse-positional",
    "morse-sonnet",
    "random-pattern",
    "iris-encode",
)

_TASK_DATASET_KINDS = {
    "morse-names": "morse",
    "morse-positional": "morse",
    "morse-sonnet": "morse",
    "random-pattern": "random_pattern",
    "iris-encode": "iris",
}


def _load_experiment(args) -> ExperimentConfig:
    if getattr(args, "preset", None):
        return load_preset(args.preset)
    if getattr(args, "config", None):
        return load_config(args.config)
    raise OdesaError("one of --config or --preset is required")


def _default_dataset_spec(task: str, seed: int | None) -> dict:
    kind = _TASK_DATASET_KINDS[task]
    spec: dict = {"kind": kind}
    if kind == "morse":
        spec["task"] = task.removeprefix("morse-")
    if kind == "random_pattern" and seed is not None:
        spec["seed"] = seed
    return spec


def cmd_generate(args) -> int:
    if args.config or args.preset:
        config = _load_experiment(args)
        spec = config.dataset
        if spec["kind"] != _TASK_DATASET_KINDS[args.task]:
            raise OdesaError(
                f"task {args.task!r} expects a {_TASK_DATASET_KINDS[args.task]!r} dataset, "
                f"config has {spec['kind']!r}"
            )
        if spec["kind"] == "random_pattern" and args.seed is not None:
            spec = {**spec, "seed": args.seed}
    else:
        doc = {
            "version": 1,
            "dataset": _default_dataset_spec(args.task, args.seed),
            "network": {"hidden": [], "output": {"tau": 1.0}},
            "epochs": 1,
        }
        spec = ExperimentConfig.from_dict(doc).dataset

    if spec["kind"] == "iris":
        samples, classes, _ = load_iris_data(args.data or spec["csv"])
        encoder = GrfEncoder(
            fields_per_feature=spec["fields_per_feature"],
            beta=spec["beta"],
            window=spec["window"],
            cutoff=spec["cutoff"],
        ).fit(samples)
        dataset = encode_dataset(encoder, samples, classes, int(classes.max()) + 1)
    else:
        stub = ExperimentConfig(
            dataset=spec,
            network={"hidden": [], "output": {"tau": 1.0}},
            split={"kind": "none"},
            epochs=1,
            seeds=[args.seed if args.seed is not None else 0],
        )
        dataset = experiments.prepare_data(stub, args.seed if args.seed is not None else 0).train

    save_dataset(args.out, dataset)
    n_events = sum(len(ev) for ev, _ in dataset.examples)
    print(
        f"wrote {len(dataset.examples)} example(s), {n_events} events, "
        f"{dataset.n_label_events()} labels to {args.out}"
    )
    return 0


def cmd_train(args) -> int:
    config = _load_experiment(args)
    if args.data:
        config.dataset = {"kind": "csv", "path": args.data}
        config.split = {"kind": "none"}
    seed = args.seed if args.seed is not None else config.seeds[0]
    result = experiments.run_training(
        config,
        seed,
        out_dir=args.out,
        epochs=args.epochs,
        resume=args.resume,
        record_events=not args.no_events,
    )
    print(
        f"seed {seed}: trained {result.epochs} epochs; "
        f"final train accuracy {result.final_train.accuracy:.4f}, "
        f"eval accuracy {result.final_eval.accuracy:.4f}"
    )
    print(f"artifacts written to {args.out}")
    return 0


def cmd_eval(args) -> int:
    try:
        with open(args.checkpoint, "r", encoding="utf-8") as fh:
            ckpt = json.load(fh)
    except FileNotFoundError:
        raise OdesaError(f"checkpoint not found: {args.checkpoint}") from None
    except json.JSONDecodeError as exc:
        raise OdesaError(f"{args.checkpoint}: {exc}") from None
    if "network" not in ckpt:
        raise OdesaError(f"{args.checkpoint}: not a run checkpoint (missing 'network')")
    net = Network.from_state_dict(ckpt["network"])

    if args.data:
        dataset = load_dataset(args.data)
    elif args.config or args.preset:
        config = _load_experiment(args)
        seed = args.seed if args.seed is not None else ckpt.get("seed", config.seeds[0])
        dataset = experiments.prepare_data(config, seed).eval_set
    else:
        raise OdesaError("eval needs --data or --config/--preset to supply a dataset")

    stats = experiments.evaluate(net, dataset)
    report = {"version": experiments.METRICS_VERSION, "test": experiments.stats_report(stats)}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        experiments.write_json(os.path.join(args.out, "metrics.json"), report)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_cross_validate(args) -> int:
    config = _load_experiment(args)
    report = experiments.cross_validate(
        config, folds=args.folds, epochs=args.epochs, max_workers=args.workers
    )
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        experiments.write_json(os.path.join(args.out, "cross_validation.json"), report)
    accs = [r["accuracy"] for r in report["runs"]]
    print(
        f"{report['folds']}-fold x {len(report['seeds'])} seed(s): "
        f"mean accuracy {report['mean_accuracy']:.4f} "
        f"(std {report['std_accuracy']:.4f}, min {min(accs):.4f}, max {max(accs):.4f})"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="odesa",
        description="Event-driven spiking network training with adaptive selection thresholds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=False):
        p.add_argument("--config", help="experiment config JSON path")
        p.add_argument("--preset", choices=PRESET_NAMES, help="bundled experiment config")
        p.add_argument("--seed", type=int, default=None, help="run seed")
        p.add_argument("--out", required=out_required, help="output directory")

    p = sub.add_parser("generate", help="write a task's spike and label CSV files")
    p.add_argument("task", choices=GENERATE_TASKS)
    common(p, out_required=True)
    p.add_argument("--data", help="iris CSV path (iris-encode only)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train one seed and write run artifacts")
    common(p, out_required=True)
    p.add_argument("--epochs", type=int, default=None, help="override config epochs")
    p.add_argument("--data", help="train on a spike dataset directory instead of the config dataset")
    p.add_argument("--resume", action="store_true", help="continue from an existing checkpoint")
    p.add_argument("--no-events", action="store_true", help="skip writing events.csv")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a checkpoint on a dataset")
    p.add_argument("--checkpoint", required=True, help="checkpoint.json from a training run")
    common(p)
    p.add_argument("--data", help="spike dataset directory or events.csv path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cross-validate", help="k-fold cross-validation over the config seeds")
    common(p)
    p.add_argument("--folds", type=int, default=None, help="override config fold count")
    p.add_argument("--epochs", type=int, default=None, help="override config epochs")
    p.add_argument("--workers", type=int, default=None, help="parallel worker processes")
    p.set_defaults(func=cmd_cross_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OdesaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
