"""Population coding of real-valued samples into spike times.

Each feature is covered by ``m`` Gaussian receptive fields spread over the
feature's observed range; a field's activation maps linearly to a spike
time inside the encoding window (strong activation fires early). Every
field channel spikes exactly once per sample unless a cutoff is set.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import DegenerateRangeError
from .events import Event, LabeledEvent
from .spike_io import SpikeDataset, quantize_time


@dataclass
class GrfEncoder:
    """Encoder state: layout parameters plus per-feature ranges.

    ``fields_per_feature`` must be at least 3 because the center and width
    formulas divide by ``m - 2``. Ranges are learned with :meth:`fit`
    (training split only) before any encoding.
    """

    fields_per_feature: int = 5
    beta: float = 1.5
    window: float = 1.0
    cutoff: float | None = None  # drop spikes with activation below this
    ranges: np.ndarray | None = None  # (n_features, 2) after fit

    def __post_init__(self):
        if self.fields_per_feature < 3:
            raise ValueError("fields_per_feature must be >= 3")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.window <= 0:
            raise ValueError("window must be positive")

    @property
    def n_features(self) -> int:
        if self.ranges is None:
            raise ValueError("encoder is not fitted")
        return self.ranges.shape[0]

    @property
    def n_channels(self) -> int:
        return self.n_features * self.fields_per_feature

    def fit(self, samples: np.ndarray) -> "GrfEncoder":
        """Learn per-feature (min, max) ranges from ``samples``."""
        samples = np.asarray(samples, dtype=float)
        lo = samples.min(axis=0)
        hi = samples.max(axis=0)
        degenerate = np.nonzero(hi <= lo)[0]
        if degenerate.size:
            raise DegenerateRangeError(
                f"feature(s) {degenerate.tolist()} have zero-width range"
            )
        self.ranges = np.stack([lo, hi], axis=1)
        return self

    def _field_layout(self, feature: int) -> tuple[np.ndarray, float]:
        lo, hi = self.ranges[feature]
        m = self.fields_per_feature
        span = (hi - lo) / (m - 2)
        i = np.arange(1, m + 1)
        centers = lo + (2 * i - 3) / 2 * span
        sigma = span / self.beta
        return centers, sigma

    def activations(self, sample: np.ndarray) -> np.ndarray:
        """Gaussian field activations, shape (n_features, m), in (0, 1]."""
        sample = np.asarray(sample, dtype=float)
        if sample.shape != (self.n_features,):
            raise ValueError(
                f"sample shape {sample.shape} does not match {self.n_features} features"
            )
        out = np.empty((self.n_features, self.fields_per_feature))
        for f in range(self.n_features):
            centers, sigma = self._field_layout(f)
            out[f] = np.exp(-((sample[f] - centers) ** 2) / (2 * sigma**2))
        return out

    def encode(self, sample) -> list[Event]:
        """One spike per field channel at t = window * (1 - activation),
        sorted by (time, channel)."""
        g = self.activations(sample)
        times = quantize_time_vec(self.window * (1.0 - g.ravel()))
        events = [Event(ch, t) for ch, t in enumerate(times)]
        if self.cutoff is not None:
            keep = g.ravel() >= self.cutoff
            events = [e for e, k in zip(events, keep) if k]
        events.sort(key=lambda e: (e.time, e.channel))
        return events

    def encode_labeled(self, sample, class_id: int):
        """Encode one sample and attach its class label to the last spike."""
        events = self.encode(sample)
        return events, [LabeledEvent(class_id, events[-1].time)]


def quantize_time_vec(times: np.ndarray) -> np.ndarray:
    return np.round(times, 9)


def encode_dataset(encoder: GrfEncoder, samples, classes, n_classes: int) -> SpikeDataset:
    """Encode a sample matrix into a segmented dataset (one example per
    sample, each with a single label event)."""
    examples = [
        encoder.encode_labeled(x, int(y)) for x, y in zip(samples, classes, strict=True)
    ]
    return SpikeDataset(
        n_channels=encoder.n_channels,
        n_classes=n_classes,
        examples=examples,
        time_unit="seconds",
    )


def load_iris_data(path=None) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Read a 150-row style iris CSV: four numeric columns plus a class
    name. Classes are numbered in order of first appearance. With no path,
    the bundled copy of the dataset is used.
    """
    if path is None:
        ref = resources.files("odesa.data").joinpath("iris.csv")
        with ref.open("r", encoding="utf-8") as fh:
            return _parse_iris(fh)
    with open(path, "r", encoding="utf-8") as fh:
        return _parse_iris(fh)


def _parse_iris(fh) -> tuple[np.ndarray, np.ndarray, list[str]]:
    reader = csv.reader(fh)
    header = next(reader)
    if len(header) != 5:
        raise ValueError(f"expected 5 columns, got {len(header)}")
    rows, names, class_ids = [], [], []
    for row in reader:
        if not row:
            continue
        if len(row) != 5:
            raise ValueError(f"expected 5 fields, got {len(row)}: {row!r}")
        rows.append([float(v) for v in row[:4]])
        name = row[4].strip()
        if name not in names:
            names.append(name)
        class_ids.append(names.index(name))
    return np.asarray(rows), np.asarray(class_ids, dtype=int), names
