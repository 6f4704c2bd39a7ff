"""A hard winner-take-all neuron layer with adaptive selection thresholds.

Each neuron holds a unit-norm weight row and a scalar selection threshold.
An incoming spike is matched against all neurons by dot product with the
normalized input surface; the best match among neurons whose value crosses
their threshold wins and emits a spike. Winning captures eligibility
buffers (the weight delta toward the current context and the value/threshold
gap) that later reward calls consume. Punishing lowers thresholds to make
neurons receptive again.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .events import Event, TimeSurface, TraceSet


@dataclass
class LayerParams:
    """Full parameter set of one layer.

    ``tau_input`` decays the layer's input surface; ``tau_trace`` decays the
    memory of the layer's own spikes that the next layer's activity is
    matched against (``None`` means the trace is instantaneous, which is the
    output-layer behaviour: it can only be rewarded at the exact time of one
    of its spikes).
    """

    n_neurons: int
    n_inputs: int
    tau_input: float
    tau_trace: float | None = None
    eta: float = 0.01
    eta_thresh: float = 0.01
    theta_open: float = 0.001
    phi: float = 0.1
    theta_init: float = 0.001
    c: float = 1.0
    feast_delta: float = 0.001

    def validate(self) -> None:
        if self.n_neurons < 1:
            raise ValueError("n_neurons must be >= 1")
        if self.n_inputs < 1:
            raise ValueError("n_inputs must be >= 1")
        if self.tau_input <= 0:
            raise ValueError("tau_input must be positive")
        if self.tau_trace is not None and self.tau_trace <= 0:
            raise ValueError("tau_trace must be positive or None")
        if not 0 < self.eta <= 1:
            raise ValueError("eta must be in (0, 1]")
        if not 0 < self.eta_thresh <= 1:
            raise ValueError("eta_thresh must be in (0, 1]")
        if self.theta_open <= 0:
            raise ValueError("theta_open must be positive")
        if not 0 < self.phi < 1:
            raise ValueError("phi must be in (0, 1)")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.feast_delta <= 0:
            raise ValueError("feast_delta must be positive")


class Layer:
    """Mutable layer state plus the event-driven update rules."""

    __slots__ = ("params", "w", "theta", "dw", "dtheta", "traces", "surface")

    def __init__(self, params: LayerParams, rng: np.random.Generator):
        params.validate()
        self.params = params
        n, d = params.n_neurons, params.n_inputs
        w = rng.random((n, d))
        self.w = w / np.linalg.norm(w, axis=1, keepdims=True)
        self.theta = np.full(n, float(params.theta_init))
        self.dw = np.zeros((n, d))
        self.dtheta = np.zeros(n)
        self.traces = TraceSet(n, params.tau_trace)
        self.surface = TimeSurface(d, params.tau_input, params.c)

    @property
    def n_neurons(self) -> int:
        return self.params.n_neurons

    def _match(self, event: Event) -> tuple[np.ndarray, np.ndarray, int | None]:
        """Update the surface with ``event`` and run the threshold-gated
        dot-product match. Returns (context, values, winner-or-None)."""
        self.surface.update(event)
        s = self.surface.read(event.time)
        norm = float(np.linalg.norm(s))
        if norm == 0.0:
            return s, np.zeros(self.n_neurons), None
        ctx = s / norm
        v = self.w @ ctx
        eligible = v >= self.theta
        if not eligible.any():
            return ctx, v, None
        # np.argmax takes the first maximum, so ties go to the lowest index.
        winner = int(np.argmax(np.where(eligible, v, -np.inf)))
        return ctx, v, winner

    def forward(self, event: Event) -> Event | None:
        """Process one input spike; emit at most one output spike.

        A win overwrites the winner's eligibility buffers with the current
        context delta and value/threshold gap, and records the spike in the
        layer's trace memory.
        """
        ctx, v, winner = self._match(event)
        if winner is None:
            return None
        self.dw[winner] = ctx - self.w[winner]
        self.dtheta[winner] = v[winner] - self.theta[winner]
        self.traces.record(winner, event.time)
        return Event(winner, event.time)

    def reward(self, neuron: int) -> None:
        """Consume the neuron's eligibility: pull its weights toward the
        stored context and raise its threshold toward the stored value.

        A neuron that never won has zero eligibility, so this is a no-op.
        """
        row = self.w[neuron] + self.params.eta * self.dw[neuron]
        self.w[neuron] = row / np.linalg.norm(row)
        self.theta[neuron] += self.params.eta_thresh * self.dtheta[neuron]

    def punish(self, neurons: np.ndarray | slice | int | None = None) -> None:
        """Lower selection thresholds by the fixed opening step.

        ``None`` targets the whole layer. Thresholds are not floored; a
        negative threshold just makes a neuron unconditionally eligible.
        """
        if neurons is None:
            self.theta -= self.params.theta_open
        else:
            self.theta[neurons] -= self.params.theta_open

    def record_local_attention(self, t: float) -> None:
        """Handle an activity notification from the next layer at time ``t``:
        reward neurons whose trace is still recent, punish the rest."""
        recent = self.traces.read(t) >= self.params.phi
        if recent.any():
            rows = self.w[recent] + self.params.eta * self.dw[recent]
            rows /= np.linalg.norm(rows, axis=1, keepdims=True)
            self.w[recent] = rows
            self.theta[recent] += self.params.eta_thresh * self.dtheta[recent]
        stale = ~recent
        if stale.any():
            self.theta[stale] -= self.params.theta_open

    def feast_step(self, event: Event) -> Event | None:
        """Unsupervised update step: a winner is pulled toward the context
        and its threshold raised by a fixed amount; with no winner every
        threshold drops by the same amount and no spike is emitted."""
        ctx, v, winner = self._match(event)
        if winner is None:
            self.theta -= self.params.feast_delta
            return None
        row = self.w[winner] + self.params.eta * (ctx - self.w[winner])
        self.w[winner] = row / np.linalg.norm(row)
        self.theta[winner] += self.params.feast_delta
        return Event(winner, event.time)

    def reset_dynamic_state(self) -> None:
        """Clear surface, traces and eligibility; keep weights and thresholds."""
        self.surface.reset()
        self.traces.reset()
        self.dw.fill(0.0)
        self.dtheta.fill(0.0)

    def state_dict(self) -> dict:
        return {"w": self.w.tolist(), "theta": self.theta.tolist()}

    def load_state_dict(self, state: dict) -> None:
        w = np.asarray(state["w"], dtype=float)
        theta = np.asarray(state["theta"], dtype=float)
        if w.shape != self.w.shape or theta.shape != self.theta.shape:
            raise ValueError(
                f"state shape mismatch: got w{w.shape}, theta{theta.shape}, "
                f"expected w{self.w.shape}, theta{self.theta.shape}"
            )
        self.w = w
        self.theta = theta
