"""Spike stream files.

Two plain CSV shapes: event files with a ``channel,time`` header and label
files with a ``class,time`` header. Times are decimal with at most nine
fractional digits, LF line endings, UTF-8. A dataset directory bundles one
or more such file pairs under a ``dataset.json`` manifest, which is how
segmented datasets (one stream per example) are stored on disk.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .errors import FormatError, OutOfOrderError
from .events import Event, LabeledEvent

MANIFEST_VERSION = 1
MANIFEST_NAME = "dataset.json"

EVENT_HEADER = "channel,time"
LABEL_HEADER = "class,time"


def format_time(t: float) -> str:
    """Canonical on-disk form of a timestamp: up to 9 fractional digits,
    trailing zeros trimmed."""
    s = f"{t:.9f}".rstrip("0").rstrip(".")
    return s if s else "0"


def quantize_time(t: float) -> float:
    """Snap a timestamp to the 9-decimal file grid, so generated streams
    survive a save/load round trip unchanged."""
    return round(t, 9)


def save_events_csv(path, events) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(EVENT_HEADER + "\n")
        for e in events:
            fh.write(f"{e.channel},{format_time(e.time)}\n")


def save_labels_csv(path, labels) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(LABEL_HEADER + "\n")
        for lab in labels:
            fh.write(f"{lab.class_id},{format_time(lab.time)}\n")


def _parse_rows(path, header: str):
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != header:
            raise FormatError(f"{path}: line 1: expected header {header!r}, got {first!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise FormatError(f"{path}: line {lineno}: expected 2 fields, got {len(parts)}")
            try:
                index = int(parts[0])
                t = float(parts[1])
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: {exc}") from None
            if index < 0:
                raise FormatError(f"{path}: line {lineno}: negative index {index}")
            if t < 0:
                raise FormatError(f"{path}: line {lineno}: negative time {t}")
            yield lineno, index, t


def load_events_csv(path, n_channels: int | None = None) -> list[Event]:
    """Load an event file, checking sort order and channel bounds."""
    events: list[Event] = []
    prev = -1.0
    for lineno, channel, t in _parse_rows(path, EVENT_HEADER):
        if n_channels is not None and channel >= n_channels:
            raise FormatError(
                f"{path}: line {lineno}: channel {channel} >= declared count {n_channels}"
            )
        if t < prev:
            raise OutOfOrderError(
                f"{path}: line {lineno}: time {format_time(t)} precedes {format_time(prev)}"
            )
        prev = t
        events.append(Event(channel, t))
    return events


def load_labels_csv(path, n_classes: int | None = None) -> list[LabeledEvent]:
    labels: list[LabeledEvent] = []
    prev = -1.0
    for lineno, class_id, t in _parse_rows(path, LABEL_HEADER):
        if n_classes is not None and class_id >= n_classes:
            raise FormatError(
                f"{path}: line {lineno}: class {class_id} >= declared count {n_classes}"
            )
        if t < prev:
            raise OutOfOrderError(
                f"{path}: line {lineno}: time {format_time(t)} precedes {format_time(prev)}"
            )
        prev = t
        labels.append(LabeledEvent(class_id, t))
    return labels


@dataclass
class SpikeDataset:
    """In-memory dataset: per-example (events, labels) pairs.

    A continuous stream is a dataset with exactly one example; datasets with
    several examples are treated as segmented and the network's dynamic
    state is reset between them.
    """

    n_channels: int
    n_classes: int
    examples: list = field(default_factory=list)
    time_unit: str = "steps"

    @property
    def segmented(self) -> bool:
        return len(self.examples) > 1

    def n_label_events(self) -> int:
        return sum(len(labels) for _, labels in self.examples)


def save_dataset(out_dir, dataset: SpikeDataset) -> None:
    """Write a dataset directory: manifest plus one CSV pair per example.

    Single-example datasets use plain ``events.csv``/``labels.csv`` names;
    segmented ones use zero-padded per-example prefixes.
    """
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    single = len(dataset.examples) == 1
    for i, (events, labels) in enumerate(dataset.examples):
        stem = "" if single else f"ex{i:05d}."
        ev_name, lab_name = f"{stem}events.csv", f"{stem}labels.csv"
        save_events_csv(os.path.join(out_dir, ev_name), events)
        save_labels_csv(os.path.join(out_dir, lab_name), labels)
        entries.append({"events": ev_name, "labels": lab_name})
    manifest = {
        "version": MANIFEST_VERSION,
        "n_channels": dataset.n_channels,
        "n_classes": dataset.n_classes,
        "time_unit": dataset.time_unit,
        "examples": entries,
    }
    with open(os.path.join(out_dir, MANIFEST_NAME), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def load_dataset(path) -> SpikeDataset:
    """Read a dataset directory (or a bare events.csv path with an optional
    labels.csv sibling) back into memory."""
    if os.path.isfile(path):
        events = load_events_csv(path)
        lab_path = os.path.join(os.path.dirname(path) or ".", "labels.csv")
        labels = load_labels_csv(lab_path) if os.path.exists(lab_path) else []
        n_channels = max((e.channel for e in events), default=-1) + 1
        n_classes = max((l.class_id for l in labels), default=-1) + 1
        return SpikeDataset(n_channels, n_classes, [(events, labels)])
    manifest_path = os.path.join(path, MANIFEST_NAME)
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise FormatError(f"{path}: not a dataset directory (missing {MANIFEST_NAME})") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{manifest_path}: {exc}") from None
    if manifest.get("version") != MANIFEST_VERSION:
        raise FormatError(
            f"{manifest_path}: unsupported version {manifest.get('version')!r}"
        )
    n_channels = manifest["n_channels"]
    n_classes = manifest["n_classes"]
    examples = []
    for entry in manifest["examples"]:
        events = load_events_csv(os.path.join(path, entry["events"]), n_channels)
        labels = load_labels_csv(os.path.join(path, entry["labels"]), n_classes)
        examples.append((events, labels))
    return SpikeDataset(
        n_channels, n_classes, examples, time_unit=manifest.get("time_unit", "steps")
    )
