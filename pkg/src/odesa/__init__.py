"""Event-driven spiking network training with adaptive selection thresholds.

The core objects are :class:`Event` streams, hard winner-take-all
:class:`Layer` instances and the multi-layer :class:`Network` that learns
online from label spikes via local and global attention signals. Encoders
for Morse code, Gaussian receptive fields and random pattern streams plus
the experiment harness live in their own modules.
"""

from .errors import (
    ConfigError,
    ContractError,
    DegenerateRangeError,
    FormatError,
    NoContextError,
    OdesaError,
    OutOfOrderError,
)
from .events import Event, LabeledEvent, TimeSurface, TraceSet
from .layer import Layer, LayerParams
from .network import (
    EpochStats,
    HiddenLayerConfig,
    Network,
    NetworkConfig,
    OutputLayerConfig,
    StepOutcome,
    align_labels,
    run_epoch,
)
from .spike_io import (
    SpikeDataset,
    load_dataset,
    load_events_csv,
    load_labels_csv,
    save_dataset,
    save_events_csv,
    save_labels_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ContractError",
    "DegenerateRangeError",
    "Event",
    "EpochStats",
    "FormatError",
    "HiddenLayerConfig",
    "LabeledEvent",
    "Layer",
    "LayerParams",
    "Network",
    "NetworkConfig",
    "NoContextError",
    "OdesaError",
    "OutOfOrderError",
    "OutputLayerConfig",
    "SpikeDataset",
    "StepOutcome",
    "TimeSurface",
    "TraceSet",
    "align_labels",
    "load_dataset",
    "load_events_csv",
    "load_labels_csv",
    "run_epoch",
    "save_dataset",
    "save_events_csv",
    "save_labels_csv",
]
