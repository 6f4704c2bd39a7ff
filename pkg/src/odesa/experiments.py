"""Experiment harness: dataset preparation, training runs, evaluation,
cross-validation and the on-disk run artifacts.

A run is fully determined by (config, seed): dataset generation, split
selection, weight initialization and per-epoch example order are all
derived from the run seed, so re-running a config produces byte-identical
checkpoints, event logs and metrics.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .encoding import GrfEncoder, encode_dataset, load_iris_data
from .errors import ConfigError
from .morse import (
    MorseTaskConfig,
    build_morse_task,
    names_task_config,
    positional_task_config,
    sonnet_task_config,
)
from .network import (
    EpochStats,
    HiddenLayerConfig,
    Network,
    NetworkConfig,
    OutputLayerConfig,
    run_epoch,
)
from .patterns import RandomPatternTaskConfig, build_random_pattern_task
from .spike_io import SpikeDataset, format_time, load_dataset

METRICS_VERSION = 1
RUN_CHECKPOINT_VERSION = 1

EVENT_LOG_HEADER = (
    "epoch,example,time,layer,winner,local_attention,global_attention,label,prediction"
)


# ---------------------------------------------------------------------------
# dataset preparation


@dataclass
class DataBundle:
    """What one run trains and scores on. ``test`` is None for stream tasks,
    which are scored on the training stream itself."""

    train: SpikeDataset
    test: SpikeDataset | None

    @property
    def eval_set(self) -> SpikeDataset:
        return self.test if self.test is not None else self.train


def stratified_holdout(
    classes: np.ndarray, train_fraction: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Split sample indices per class, keeping class proportions."""
    train_parts, test_parts = [], []
    for c in np.unique(classes):
        idx = np.nonzero(classes == c)[0]
        rng.shuffle(idx)
        n_train = int(round(train_fraction * len(idx)))
        n_train = min(max(n_train, 1), len(idx) - 1)
        train_parts.append(idx[:n_train])
        test_parts.append(idx[n_train:])
    return np.sort(np.concatenate(train_parts)), np.sort(np.concatenate(test_parts))


def stratified_folds(classes: np.ndarray, folds: int, rng: np.random.Generator) -> list:
    """Per-class round-robin assignment into ``folds`` test-index arrays."""
    assignment = [[] for _ in range(folds)]
    for c in np.unique(classes):
        idx = np.nonzero(classes == c)[0]
        rng.shuffle(idx)
        for i, sample in enumerate(idx):
            assignment[i % folds].append(int(sample))
    return [np.sort(np.asarray(a, dtype=int)) for a in assignment]


def _morse_dataset(spec: dict) -> SpikeDataset:
    if spec["task"] is not None:
        presets = {
            "names": names_task_config,
            "positional": positional_task_config,
            "sonnet": sonnet_task_config,
        }
        if spec["task"] not in presets:
            raise ConfigError(
                f"unknown morse task {spec['task']!r} (expected one of {sorted(presets)})"
            )
        cfg = presets[spec["task"]]()
        cfg.unit = spec["unit"]
        cfg.intra_letter_gap = spec["intra_letter_gap"]
        cfg.inter_letter_gap = spec["inter_letter_gap"]
        cfg.inter_word_gap = spec["inter_word_gap"]
        cfg.sequence_gap = spec["sequence_gap"] or cfg.inter_word_gap
    else:
        cfg = MorseTaskConfig(
            vocabulary=list(spec["vocabulary"]),
            unit=spec["unit"],
            intra_letter_gap=spec["intra_letter_gap"],
            inter_letter_gap=spec["inter_letter_gap"],
            inter_word_gap=spec["inter_word_gap"],
            sequence_gap=spec["sequence_gap"],
        )
    return build_morse_task(cfg)


def prepare_data(
    config: ExperimentConfig, seed: int, fold: tuple[int, int] | None = None
) -> DataBundle:
    """Build the train/test datasets for one run.

    ``fold`` is (index, count) during cross-validation and overrides the
    config's split section. Splits are only meaningful for segmented
    datasets; stream tasks must use split kind "none".
    """
    spec = config.dataset
    kind = spec["kind"]

    if kind == "iris":
        samples, classes, _ = load_iris_data(spec["csv"])
        encoder_args = dict(
            fields_per_feature=spec["fields_per_feature"],
            beta=spec["beta"],
            window=spec["window"],
            cutoff=spec["cutoff"],
        )
        return _split_samples(samples, classes, encoder_args, config.split, seed, fold)

    if kind == "random_pattern":
        task_seed = spec["seed"] if spec["seed"] is not None else seed
        cfg = RandomPatternTaskConfig(
            n_channels=spec["n_channels"],
            n_symbols=spec["n_symbols"],
            min_spikes=spec["min_spikes"],
            max_spikes=spec["max_spikes"],
            targets=tuple(spec["targets"]),
            stream_length=spec["stream_length"],
            symbol_window=spec["symbol_window"],
            seed=task_seed,
        )
        dataset = build_random_pattern_task(cfg)
    elif kind == "morse":
        dataset = _morse_dataset(spec)
    elif kind == "csv":
        dataset = load_dataset(spec["path"])
    else:
        raise ConfigError(f"unknown dataset kind {kind!r}")

    if dataset.segmented and (config.split["kind"] != "none" or fold is not None):
        raise ConfigError("splitting loaded segmented datasets is not supported")
    if not dataset.segmented and (config.split["kind"] != "none" or fold is not None):
        raise ConfigError(f"dataset kind {kind!r} is a stream; use split kind 'none'")
    return DataBundle(train=dataset, test=None)


def _split_samples(samples, classes, encoder_args, split, seed, fold) -> DataBundle:
    n_classes = int(classes.max()) + 1
    rng = np.random.default_rng([seed, 0xD5])
    if fold is not None:
        fold_idx, folds = fold
        test_sets = stratified_folds(classes, folds, rng)
        test_idx = test_sets[fold_idx]
        train_idx = np.sort(
            np.concatenate([t for i, t in enumerate(test_sets) if i != fold_idx])
        )
    elif split["kind"] == "holdout":
        train_idx, test_idx = stratified_holdout(classes, split["train_fraction"], rng)
    elif split["kind"] == "kfold":
        test_sets = stratified_folds(classes, split["folds"], rng)
        test_idx = test_sets[0]
        train_idx = np.sort(np.concatenate(test_sets[1:]))
    else:
        train_idx = np.arange(len(classes))
        test_idx = None

    encoder = GrfEncoder(**encoder_args).fit(samples[train_idx])
    train = encode_dataset(encoder, samples[train_idx], classes[train_idx], n_classes)
    test = None
    if test_idx is not None and len(test_idx):
        test = encode_dataset(encoder, samples[test_idx], classes[test_idx], n_classes)
    return DataBundle(train=train, test=test)


# ---------------------------------------------------------------------------
# networks from configs


def build_network(config: ExperimentConfig, dataset: SpikeDataset, seed: int) -> Network:
    hidden = [HiddenLayerConfig(**h) for h in config.network["hidden"]]
    output = OutputLayerConfig(n_classes=dataset.n_classes, **config.network["output"])
    return Network(
        NetworkConfig(
            n_inputs=dataset.n_channels, hidden=hidden, output=output, seed=seed
        )
    )


def shuffle_order(dataset: SpikeDataset, seed: int, epoch: int):
    """Example presentation order for one epoch: fixed for streams, a
    seeded per-epoch permutation for segmented datasets."""
    if not dataset.segmented:
        return None
    rng = np.random.default_rng([seed, 1 + epoch])
    return rng.permutation(len(dataset.examples))


def train_network(
    net: Network,
    dataset: SpikeDataset,
    epochs: int,
    seed: int,
    start_epoch: int = 0,
    on_epoch=None,
    collect_record: bool = False,
) -> list[float]:
    """Run training epochs; returns per-epoch label-coincident accuracy.

    ``on_epoch(epoch, stats, rows)`` fires after each epoch; ``rows`` is the
    event log for that epoch when ``collect_record`` is set, else None.
    """
    history = []
    for epoch in range(start_epoch, epochs):
        rows = [] if collect_record else None
        stats = run_epoch(
            net,
            dataset.examples,
            learn=True,
            order=shuffle_order(dataset, seed, epoch),
            record=rows,
        )
        history.append(stats.accuracy)
        if on_epoch is not None:
            on_epoch(epoch, stats, rows)
    return history


def evaluate(net: Network, dataset: SpikeDataset) -> EpochStats:
    """Frozen scoring pass over a dataset."""
    return run_epoch(net, dataset.examples, learn=False)


# ---------------------------------------------------------------------------
# run artifacts


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_json(path: str, doc: dict) -> None:
    _atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def stats_report(stats: EpochStats) -> dict:
    return {
        "accuracy": stats.accuracy,
        "per_class_accuracy": stats.per_class_accuracy(),
        "counts": {
            "labels": stats.n_labels,
            "hits": stats.hits,
            "misses": stats.misses,
            "wrong": stats.wrong,
        },
        "false_positive_rate": stats.false_positive_rate,
        "spikes_per_event_per_layer": stats.spikes_per_event(),
        "events": stats.n_events,
    }


def event_log_rows(epoch: int, rows) -> list[str]:
    """Render (example, StepOutcome) pairs into event-log CSV lines. Layer
    indices count hidden layers from 0; the output layer comes last."""
    def cell(v):
        return "" if v is None else str(v)

    lines = []
    for example, outcome in rows:
        t = format_time(outcome.time)
        label = cell(outcome.label)
        for h, winner in enumerate(outcome.hidden_winners):
            lines.append(
                f"{epoch},{example},{t},{h},{cell(winner)},"
                f"{int(outcome.local_attention[h])},{int(outcome.global_attention[h])},"
                f"{label},"
            )
        out_layer = len(outcome.hidden_winners)
        lines.append(
            f"{epoch},{example},{t},{out_layer},{cell(outcome.output_winner)},0,"
            f"{int(outcome.label is not None)},{label},{cell(outcome.prediction)}"
        )
    return lines


@dataclass
class RunResult:
    seed: int
    epochs: int
    history: list[float]
    final_train: EpochStats
    final_eval: EpochStats
    net: Network


def run_training(
    config: ExperimentConfig,
    seed: int,
    out_dir: str | None = None,
    epochs: int | None = None,
    resume: bool = False,
    record_events: bool = True,
) -> RunResult:
    """Train one seed of an experiment, optionally writing run artifacts.

    With ``out_dir`` set, the run writes ``checkpoint.json`` (refreshed
    after every epoch, so an interrupted run resumes exactly), ``events.csv``
    and ``metrics.json``.
    """
    epochs = epochs if epochs is not None else config.epochs
    bundle = prepare_data(config, seed)
    net = build_network(config, bundle.train, seed)
    history: list[float] = []
    start_epoch = 0
    events_path = checkpoint_path = None
    events_fh = None

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        events_path = os.path.join(out_dir, "events.csv")
        checkpoint_path = os.path.join(out_dir, "checkpoint.json")

        if resume and os.path.exists(checkpoint_path):
            with open(checkpoint_path, "r", encoding="utf-8") as fh:
                ckpt = json.load(fh)
            if ckpt.get("run_version") != RUN_CHECKPOINT_VERSION:
                raise ConfigError(
                    f"{checkpoint_path}: unsupported run checkpoint version "
                    f"{ckpt.get('run_version')!r}"
                )
            if ckpt["seed"] != seed:
                raise ConfigError(
                    f"{checkpoint_path}: checkpoint seed {ckpt['seed']} != requested {seed}"
                )
            net = Network.from_state_dict(ckpt["network"])
            history = list(ckpt["history"])
            start_epoch = ckpt["epochs_done"]
            if record_events and os.path.exists(events_path):
                with open(events_path, "r+", encoding="utf-8") as fh:
                    fh.truncate(ckpt["events_bytes"])

        if record_events:
            if start_epoch == 0 or not os.path.exists(events_path):
                with open(events_path, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(EVENT_LOG_HEADER + "\n")
            events_fh = open(events_path, "a", encoding="utf-8", newline="\n")

    def checkpoint(epochs_done: int) -> None:
        if checkpoint_path is None:
            return
        if events_fh is not None:
            events_fh.flush()
        write_json(
            checkpoint_path,
            {
                "run_version": RUN_CHECKPOINT_VERSION,
                "seed": seed,
                "epochs_done": epochs_done,
                "history": history,
                "events_bytes": events_fh.tell() if events_fh is not None else 0,
                "network": net.state_dict(),
            },
        )

    def on_epoch(epoch: int, stats: EpochStats, rows) -> None:
        history.append(stats.accuracy)
        if events_fh is not None and rows is not None:
            events_fh.write("\n".join(event_log_rows(epoch, rows)) + "\n")
        checkpoint(epoch + 1)

    try:
        segment = train_network(
            net,
            bundle.train,
            epochs,
            seed,
            start_epoch=start_epoch,
            on_epoch=on_epoch if out_dir is not None else None,
            collect_record=record_events and out_dir is not None,
        )
        if out_dir is None:
            history.extend(segment)
        elif start_epoch >= epochs:
            checkpoint(start_epoch)
    finally:
        if events_fh is not None:
            events_fh.close()

    final_train = evaluate(net, bundle.train)
    final_eval = evaluate(net, bundle.eval_set)
    result = RunResult(
        seed=seed,
        epochs=max(epochs, start_epoch),
        history=history,
        final_train=final_train,
        final_eval=final_eval,
        net=net,
    )
    if out_dir is not None:
        write_json(os.path.join(out_dir, "metrics.json"), metrics_report(config, result))
    return result


def metrics_report(config: ExperimentConfig, result: RunResult) -> dict:
    return {
        "version": METRICS_VERSION,
        "seed": result.seed,
        "epochs": result.epochs,
        "dataset": config.dataset,
        "train_accuracy_per_epoch": result.history,
        "train": stats_report(result.final_train),
        "test": stats_report(result.final_eval),
    }


# ---------------------------------------------------------------------------
# cross-validation


def _cv_worker(args: tuple) -> dict:
    config_doc, seed, fold_idx, folds, epochs = args
    config = ExperimentConfig.from_dict(config_doc)
    bundle = prepare_data(config, seed, fold=(fold_idx, folds))
    net = build_network(config, bundle.train, seed)
    train_network(net, bundle.train, epochs, seed)
    stats = evaluate(net, bundle.eval_set)
    return {
        "seed": seed,
        "fold": fold_idx,
        "accuracy": stats.accuracy,
        "counts": {
            "labels": stats.n_labels,
            "hits": stats.hits,
            "misses": stats.misses,
            "wrong": stats.wrong,
        },
    }


def cross_validate(
    config: ExperimentConfig,
    folds: int | None = None,
    epochs: int | None = None,
    max_workers: int | None = None,
) -> dict:
    """Train every (seed, fold) pair independently and aggregate accuracy.

    Folds are stratified per seed; runs execute in parallel worker
    processes and are aggregated in a fixed order, so the report is
    deterministic.
    """
    if folds is None:
        if config.split["kind"] != "kfold":
            raise ConfigError("cross_validate needs split kind 'kfold' or an explicit fold count")
        folds = config.split["folds"]
    if folds < 2:
        raise ConfigError("folds must be >= 2")
    epochs = epochs if epochs is not None else config.epochs
    jobs = [
        (config.to_dict(), seed, fold_idx, folds, epochs)
        for seed in config.seeds
        for fold_idx in range(folds)
    ]
    if max_workers is None:
        max_workers = min(len(jobs), os.cpu_count() or 1)
    if max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            per_run = list(pool.map(_cv_worker, jobs))
    else:
        per_run = [_cv_worker(job) for job in jobs]
    accuracies = [r["accuracy"] for r in per_run]
    return {
        "version": METRICS_VERSION,
        "folds": folds,
        "epochs": epochs,
        "seeds": list(config.seeds),
        "runs": per_run,
        "mean_accuracy": float(np.mean(accuracies)),
        "std_accuracy": float(np.std(accuracies)),
    }
