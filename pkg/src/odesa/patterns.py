"""Random spatio-temporal pattern association task.

A fixed alphabet of random multi-channel symbols is generated once per
seed; a long stream is built by concatenating uniformly drawn symbols
back to back. Wherever one of the target symbol sequences occurs in the
stream, a class label is attached to the occurrence's last spike.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .events import Event, LabeledEvent
from .spike_io import SpikeDataset, quantize_time


@dataclass
class RandomPatternTaskConfig:
    n_channels: int = 8
    n_symbols: int = 3
    min_spikes: int = 6
    max_spikes: int = 8
    targets: tuple = ("BBA", "ACB", "CAC", "CCC")
    stream_length: int = 300
    symbol_window: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.n_symbols < 1 or self.n_symbols > 26:
            raise ValueError("n_symbols must be in [1, 26]")
        if not 1 <= self.min_spikes <= self.max_spikes:
            raise ValueError("need 1 <= min_spikes <= max_spikes")
        alphabet = self.alphabet()
        for target in self.targets:
            bad = set(target) - set(alphabet)
            if bad:
                raise ValueError(f"target {target!r} uses unknown symbols {sorted(bad)}")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("targets must be distinct")

    def alphabet(self) -> str:
        return "ABCDEFGHIJKLMNOPQRSTUVWXYZ"[: self.n_symbols]


@dataclass(frozen=True)
class Symbol:
    """One symbol's spikes as (channel, offset-within-window) pairs."""

    channels: tuple
    offsets: tuple

    @property
    def last_offset(self) -> float:
        return self.offsets[-1]


def make_symbols(cfg: RandomPatternTaskConfig, rng: np.random.Generator) -> list[Symbol]:
    symbols = []
    for _ in range(cfg.n_symbols):
        k = int(rng.integers(cfg.min_spikes, cfg.max_spikes + 1))
        channels = rng.integers(0, cfg.n_channels, size=k)
        offsets = np.array([quantize_time(t) for t in rng.uniform(0, cfg.symbol_window, size=k)])
        order = np.lexsort((channels, offsets))
        symbols.append(
            Symbol(tuple(int(c) for c in channels[order]), tuple(float(t) for t in offsets[order]))
        )
    return symbols


def find_occurrences(sequence: str, targets) -> list[tuple[int, int]]:
    """All (end-index, class-id) pairs where a target ends in ``sequence``;
    overlapping occurrences all count."""
    hits = []
    for class_id, target in enumerate(targets):
        start = 0
        while True:
            pos = sequence.find(target, start)
            if pos < 0:
                break
            hits.append((pos + len(target) - 1, class_id))
            start = pos + 1
    hits.sort()
    return hits


def build_random_pattern_task(cfg: RandomPatternTaskConfig) -> SpikeDataset:
    """Generate the stream and its labels for one seed."""
    rng = np.random.default_rng(cfg.seed)
    symbols = make_symbols(cfg, rng)
    alphabet = cfg.alphabet()
    draw = rng.integers(0, cfg.n_symbols, size=cfg.stream_length)
    sequence = "".join(alphabet[i] for i in draw)

    events: list[Event] = []
    for j, idx in enumerate(draw):
        base = j * cfg.symbol_window
        sym = symbols[idx]
        events.extend(
            Event(ch, quantize_time(base + off))
            for ch, off in zip(sym.channels, sym.offsets)
        )

    labels: list[LabeledEvent] = []
    for end, class_id in find_occurrences(sequence, cfg.targets):
        sym = symbols[draw[end]]
        t = quantize_time(end * cfg.symbol_window + sym.last_offset)
        labels.append(LabeledEvent(class_id, t))
    times = [lab.time for lab in labels]
    if len(set(times)) != len(times):
        raise ContractError("two target occurrences label the same spike time")

    return SpikeDataset(
        n_channels=cfg.n_channels,
        n_classes=len(cfg.targets),
        examples=[(events, labels)],
    )
