"""Spike events and lazily decayed per-channel state.

Everything downstream is built from two primitives: a spike, which is a
(channel, time) pair, and exponentially decaying traces of spike history.
Decay is applied on read from stored (potential, last-time) pairs, so the
cost of processing an event does not depend on how much wall-clock time
passed since the previous one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoContextError, OutOfOrderError


@dataclass(frozen=True, slots=True)
class Event:
    """A spike on an input channel at a point in time."""

    channel: int
    time: float


@dataclass(frozen=True, slots=True)
class LabeledEvent:
    """A supervisory spike: a class id attached to an input spike time."""

    class_id: int
    time: float


class TimeSurface:
    """Per-channel exponential decay state.

    Each channel stores the potential at its last spike and that spike's
    timestamp. A spike arrival decays the stored potential to the spike
    time and adds the increment ``c``; a read decays every channel to the
    read time without mutating anything.
    """

    __slots__ = ("tau", "c", "potential", "last_time")

    def __init__(self, n_channels: int, tau: float, c: float = 1.0):
        if n_channels < 1:
            raise ValueError(f"n_channels must be >= 1, got {n_channels}")
        if tau <= 0:
            raise ValueError(f"tau must be positive, got {tau}")
        if c <= 0:
            raise ValueError(f"c must be positive, got {c}")
        self.tau = float(tau)
        self.c = float(c)
        self.potential = np.zeros(n_channels)
        self.last_time = np.zeros(n_channels)

    @property
    def n_channels(self) -> int:
        return self.potential.shape[0]

    def update(self, event: Event) -> None:
        """Fold one spike into the surface. Only its channel is touched."""
        ch = event.channel
        if not 0 <= ch < self.n_channels:
            raise ValueError(f"channel {ch} out of range [0, {self.n_channels})")
        t = event.time
        prev = self.last_time[ch]
        if t < prev:
            raise OutOfOrderError(
                f"event at t={t} precedes last spike at t={prev} on channel {ch}"
            )
        self.potential[ch] = self.potential[ch] * math.exp((prev - t) / self.tau) + self.c
        self.last_time[ch] = t

    def read(self, t: float) -> np.ndarray:
        """Return every channel's value decayed to time ``t``. Pure."""
        if t < self.last_time.max():
            raise OutOfOrderError(
                f"read at t={t} precedes a recorded spike at t={self.last_time.max()}"
            )
        return self.potential * np.exp((self.last_time - t) / self.tau)

    def context(self, t: float) -> np.ndarray:
        """The surface at ``t`` normalized to unit L2 length."""
        s = self.read(t)
        norm = float(np.linalg.norm(s))
        if norm == 0.0:
            raise NoContextError(f"surface is all-zero at t={t}")
        return s / norm

    def reset(self) -> None:
        self.potential.fill(0.0)
        self.last_time.fill(0.0)


class TraceSet:
    """Last-spike memory per neuron with exponential readout.

    ``tau=None`` selects the instantaneous variant: the trace is 1.0
    exactly at a neuron's most recent spike time and 0.0 any later.
    Neurons that never spiked read as 0.0 either way.
    """

    __slots__ = ("tau", "last_spike")

    def __init__(self, n_neurons: int, tau: float | None):
        if n_neurons < 1:
            raise ValueError(f"n_neurons must be >= 1, got {n_neurons}")
        if tau is not None and tau <= 0:
            raise ValueError(f"tau must be positive or None, got {tau}")
        self.tau = tau
        self.last_spike = np.full(n_neurons, -np.inf)

    def record(self, neuron: int, t: float) -> None:
        if t < self.last_spike[neuron]:
            raise OutOfOrderError(
                f"spike at t={t} precedes neuron {neuron}'s last spike"
            )
        self.last_spike[neuron] = t

    def read(self, t: float) -> np.ndarray:
        """Per-neuron trace values at time ``t``. Pure."""
        last = self.last_spike
        latest = last.max()
        if np.isfinite(latest) and t < latest:
            raise OutOfOrderError(f"trace read at t={t} precedes a spike at t={latest}")
        if self.tau is None:
            return (last == t).astype(float)
        return np.exp((last - t) / self.tau)

    def reset(self) -> None:
        self.last_spike.fill(-np.inf)
