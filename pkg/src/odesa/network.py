"""Cascaded-layer network and the event-driven supervision state machine.

One network owns an ordered chain of hidden layers and a grouped output
layer. Every input spike is forwarded through the chain; layer activity
generates local attention signals for the layer below, and label spikes
drive a global attention sweep plus the output-layer reward/punish rule.
All learning happens at event times; between events nothing changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, OutOfOrderError
from .events import Event, LabeledEvent
from .layer import Layer, LayerParams

CHECKPOINT_VERSION = 1


@dataclass
class HiddenLayerConfig:
    """User-facing settings for one hidden layer.

    Input width and trace decay are not present on purpose: the input width
    is the previous layer's size and the trace decay equals the next layer's
    surface decay, both derived when the network is built.
    """

    n_neurons: int
    tau: float
    eta: float = 0.01
    eta_thresh: float = 0.01
    theta_open: float = 0.001
    phi: float = 0.1
    theta_init: float = 0.001
    c: float = 1.0


@dataclass
class OutputLayerConfig:
    """Settings for the grouped classification layer: ``k`` neurons per
    class, so the layer has ``k * n_classes`` neurons and the winner's
    group (``winner // k``) is the predicted class."""

    n_classes: int
    tau: float
    k: int = 1
    eta: float = 0.01
    eta_thresh: float = 0.01
    theta_open: float = 0.001
    theta_init: float = 0.001
    c: float = 1.0


@dataclass
class NetworkConfig:
    n_inputs: int
    hidden: list[HiddenLayerConfig]
    output: OutputLayerConfig
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "n_inputs": self.n_inputs,
            "hidden": [vars(h).copy() for h in self.hidden],
            "output": vars(self.output).copy(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkConfig":
        return cls(
            n_inputs=d["n_inputs"],
            hidden=[HiddenLayerConfig(**h) for h in d["hidden"]],
            output=OutputLayerConfig(**d["output"]),
            seed=d.get("seed", 0),
        )


@dataclass(frozen=True, slots=True)
class StepOutcome:
    """What one event did to the network, for scoring and logging."""

    time: float
    hidden_winners: tuple
    output_winner: int | None
    prediction: int | None
    label: int | None
    local_attention: tuple
    global_attention: tuple


class Network:
    """The trainable multi-layer machine.

    Hidden layer ``h`` reads spikes from layer ``h - 1`` (layer 0 reads the
    input channels) and its spike memory decays with the next layer's
    surface constant, so each layer's activity is judged on the timescale
    the layer above integrates over.
    """

    def __init__(self, config: NetworkConfig):
        if config.output.n_classes < 1:
            raise ValueError("n_classes must be >= 1")
        if config.output.k < 1:
            raise ValueError("k must be >= 1")
        self.config = config
        rng = np.random.default_rng(config.seed)
        self.hidden: list[Layer] = []
        n_prev = config.n_inputs
        taus = [h.tau for h in config.hidden] + [config.output.tau]
        for i, hc in enumerate(config.hidden):
            params = LayerParams(
                n_neurons=hc.n_neurons,
                n_inputs=n_prev,
                tau_input=hc.tau,
                tau_trace=taus[i + 1],
                eta=hc.eta,
                eta_thresh=hc.eta_thresh,
                theta_open=hc.theta_open,
                phi=hc.phi,
                theta_init=hc.theta_init,
                c=hc.c,
            )
            self.hidden.append(Layer(params, rng))
            n_prev = hc.n_neurons
        oc = config.output
        out_params = LayerParams(
            n_neurons=oc.k * oc.n_classes,
            n_inputs=n_prev,
            tau_input=oc.tau,
            tau_trace=None,
            eta=oc.eta,
            eta_thresh=oc.eta_thresh,
            theta_open=oc.theta_open,
            theta_init=oc.theta_init,
            c=oc.c,
        )
        self.output = Layer(out_params, rng)
        self._last_time = -np.inf

    @property
    def n_classes(self) -> int:
        return self.config.output.n_classes

    @property
    def k(self) -> int:
        return self.config.output.k

    @property
    def layers(self) -> list[Layer]:
        return self.hidden + [self.output]

    def _group(self, neuron: int) -> int:
        return neuron // self.k

    def _group_slice(self, class_id: int) -> slice:
        return slice(class_id * self.k, (class_id + 1) * self.k)

    def _check_step(self, event: Event, label: LabeledEvent | None) -> None:
        if event.time < self._last_time:
            raise OutOfOrderError(
                f"event at t={event.time} precedes previous event at t={self._last_time}"
            )
        if label is not None:
            if label.time != event.time:
                raise ContractError(
                    f"label at t={label.time} does not coincide with event at t={event.time}"
                )
            if not 0 <= label.class_id < self.n_classes:
                raise ContractError(
                    f"label class {label.class_id} out of range [0, {self.n_classes})"
                )
        self._last_time = event.time

    def _cascade(self, event: Event, learn: bool):
        """Forward ``event`` through the chain. With ``learn`` on, a spike
        in layer h sends local attention to layer h - 1 immediately."""
        n_hidden = len(self.hidden)
        winners: list[int | None] = [None] * n_hidden
        local = [False] * n_hidden
        spike: Event | None = event
        for h, layer in enumerate(self.hidden):
            out = layer.forward(spike)
            winners[h] = out.channel if out is not None else None
            if out is not None and h > 0 and learn:
                self.hidden[h - 1].record_local_attention(out.time)
                local[h - 1] = True
            spike = out
            if out is None:
                break
        output_spike = None
        if spike is not None:
            output_spike = self.output.forward(spike)
            if output_spike is not None and n_hidden > 0 and learn:
                self.hidden[-1].record_local_attention(output_spike.time)
                local[-1] = True
        return winners, local, spike, output_spike

    def record_global_attention(self, hidden_spikes: list[int | None]) -> list[bool]:
        """Bottom-up sweep on a label spike: reward each active layer's
        winner; punish every neuron of the first silent layer and stop."""
        touched = [False] * len(self.hidden)
        for h, layer in enumerate(self.hidden):
            touched[h] = True
            winner = hidden_spikes[h]
            if winner is not None:
                layer.reward(winner)
            else:
                layer.punish()
                break
        return touched

    def train_step(self, event: Event, label: LabeledEvent | None = None) -> StepOutcome:
        """Process one input spike with learning enabled.

        Supervision only runs when a label coincides with the event: the
        global attention sweep over the hidden layers, then the output rule
        (reward the winner if its group matches the label; otherwise make
        the correct group more receptive, provided the output layer saw an
        input spike at all).
        """
        self._check_step(event, label)
        winners, local, last_spike, output_spike = self._cascade(event, learn=True)
        prediction = self._group(output_spike.channel) if output_spike else None
        global_touched = [False] * len(self.hidden)
        if label is not None:
            global_touched = self.record_global_attention(winners)
            if output_spike is not None:
                if prediction == label.class_id:
                    self.output.reward(output_spike.channel)
                else:
                    self.output.punish(self._group_slice(label.class_id))
            elif last_spike is not None:
                self.output.punish(self._group_slice(label.class_id))
        return StepOutcome(
            time=event.time,
            hidden_winners=tuple(winners),
            output_winner=output_spike.channel if output_spike else None,
            prediction=prediction,
            label=label.class_id if label else None,
            local_attention=tuple(local),
            global_attention=tuple(global_touched),
        )

    def infer(self, event: Event) -> StepOutcome:
        """Frozen pass: surfaces and eligibility still track the stream, but
        no attention signals fire and no weight or threshold changes."""
        self._check_step(event, None)
        winners, local, _, output_spike = self._cascade(event, learn=False)
        return StepOutcome(
            time=event.time,
            hidden_winners=tuple(winners),
            output_winner=output_spike.channel if output_spike else None,
            prediction=self._group(output_spike.channel) if output_spike else None,
            label=None,
            local_attention=tuple(local),
            global_attention=tuple([False] * len(self.hidden)),
        )

    def reset_dynamic_state(self) -> None:
        """Forget stream state (surfaces, traces, eligibility, time guard)
        while keeping all learned weights and thresholds."""
        for layer in self.layers:
            layer.reset_dynamic_state()
        self._last_time = -np.inf

    def state_dict(self) -> dict:
        return {
            "version": CHECKPOINT_VERSION,
            "config": self.config.to_dict(),
            "layers": [layer.state_dict() for layer in self.hidden],
            "output": self.output.state_dict(),
        }

    @classmethod
    def from_state_dict(cls, state: dict) -> "Network":
        version = state.get("version")
        if version != CHECKPOINT_VERSION:
            raise ValueError(
                f"unsupported checkpoint version {version!r}, expected {CHECKPOINT_VERSION}"
            )
        net = cls(NetworkConfig.from_dict(state["config"]))
        for layer, ls in zip(net.hidden, state["layers"], strict=True):
            layer.load_state_dict(ls)
        net.output.load_state_dict(state["output"])
        return net


def align_labels(events, labels) -> list[LabeledEvent | None]:
    """Map each label to the last event sharing its timestamp.

    Returns a per-event list of labels (``None`` almost everywhere). A label
    whose time matches no event, or two labels on one event, violate the
    supervision contract and raise.
    """
    slots: list[LabeledEvent | None] = [None] * len(events)
    times = [e.time for e in events]
    ordered = sorted(labels, key=lambda l: l.time, reverse=True)
    for a, b in zip(ordered, ordered[1:]):
        if a.time == b.time:
            raise ContractError(f"two labels share the time t={a.time}")
    j = len(events) - 1
    for lab in ordered:
        while j >= 0 and times[j] > lab.time:
            j -= 1
        if j < 0 or times[j] != lab.time:
            raise ContractError(f"label at t={lab.time} has no coincident input event")
        slots[j] = lab
        j -= 1
    return slots


@dataclass
class EpochStats:
    """Label-coincident scoring plus activity counts for one pass."""

    n_events: int = 0
    n_labels: int = 0
    hits: int = 0
    misses: int = 0
    wrong: int = 0
    false_positives: int = 0
    layer_spikes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    class_labels: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    class_hits: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def accuracy(self) -> float:
        return self.hits / self.n_labels if self.n_labels else 0.0

    @property
    def false_positive_rate(self) -> float:
        unlabeled = self.n_events - self.n_labels
        return self.false_positives / unlabeled if unlabeled else 0.0

    def per_class_accuracy(self) -> list[float]:
        with np.errstate(invalid="ignore"):
            acc = self.class_hits / self.class_labels
        return [float(a) if n else 0.0 for a, n in zip(acc, self.class_labels)]

    def spikes_per_event(self) -> list[float]:
        if not self.n_events:
            return [0.0] * len(self.layer_spikes)
        return [s / self.n_events for s in self.layer_spikes.tolist()]


def run_epoch(net: Network, examples, learn: bool = True, order=None, record=None) -> EpochStats:
    """One pass over a dataset.

    ``examples`` is a sequence of (events, labels) pairs; dynamic state is
    reset before each pair, so a continuous stream is a single pair and a
    segmented dataset is one pair per example. ``order`` permutes example
    presentation. ``record`` is an optional list collecting
    ``(example_index, StepOutcome)`` rows for event-log export.
    """
    n_layers = len(net.hidden) + 1
    stats = EpochStats(
        layer_spikes=np.zeros(n_layers, dtype=int),
        class_labels=np.zeros(net.n_classes, dtype=int),
        class_hits=np.zeros(net.n_classes, dtype=int),
    )
    if order is None:
        order = range(len(examples))
    for idx in order:
        events, labels = examples[idx]
        aligned = align_labels(events, labels)
        net.reset_dynamic_state()
        for event, label in zip(events, aligned):
            if learn:
                outcome = net.train_step(event, label)
            else:
                outcome = net.infer(event)
            stats.n_events += 1
            for h, w in enumerate(outcome.hidden_winners):
                if w is not None:
                    stats.layer_spikes[h] += 1
            if outcome.output_winner is not None:
                stats.layer_spikes[-1] += 1
            if label is not None:
                stats.n_labels += 1
                stats.class_labels[label.class_id] += 1
                if outcome.prediction is None:
                    stats.misses += 1
                elif outcome.prediction == label.class_id:
                    stats.hits += 1
                    stats.class_hits[label.class_id] += 1
                else:
                    stats.wrong += 1
            elif outcome.output_winner is not None:
                stats.false_positives += 1
            if record is not None:
                if not learn and label is not None:
                    outcome = StepOutcome(
                        time=outcome.time,
                        hidden_winners=outcome.hidden_winners,
                        output_winner=outcome.output_winner,
                        prediction=outcome.prediction,
                        label=label.class_id,
                        local_attention=outcome.local_attention,
                        global_attention=outcome.global_attention,
                    )
                record.append((idx, outcome))
    return stats
