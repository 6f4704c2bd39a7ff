"""Experiment configuration files.

Configs are versioned JSON documents with four sections: ``dataset``,
``network``, ``split`` and run settings. Validation is strict: unknown
keys anywhere are errors, so a typo in a rate or decay name fails fast
instead of silently training with a default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError

CONFIG_VERSION = 1

_REQUIRED = object()

_DATASET_SCHEMAS = {
    "iris": {
        "csv": (None, None),
        "fields_per_feature": (int, 5),
        "beta": (float, 1.5),
        "window": (float, 1.0),
        "cutoff": (float, None),
    },
    "random_pattern": {
        "n_channels": (int, 8),
        "n_symbols": (int, 3),
        "min_spikes": (int, 6),
        "max_spikes": (int, 8),
        "targets": (list, ["BBA", "ACB", "CAC", "CCC"]),
        "stream_length": (int, 300),
        "symbol_window": (float, 10.0),
        "seed": (int, None),
    },
    "morse": {
        "task": (str, None),
        "vocabulary": (list, None),
        "unit": (float, 1.0),
        "intra_letter_gap": (float, 1.0),
        "inter_letter_gap": (float, 3.0),
        "inter_word_gap": (float, 7.0),
        "sequence_gap": (float, None),
    },
    "csv": {
        "path": (str, _REQUIRED),
    },
}

_HIDDEN_SCHEMA = {
    "n_neurons": (int, _REQUIRED),
    "tau": (float, _REQUIRED),
    "eta": (float, 0.01),
    "eta_thresh": (float, 0.01),
    "theta_open": (float, 0.001),
    "phi": (float, 0.1),
    "theta_init": (float, 0.001),
    "c": (float, 1.0),
}

_OUTPUT_SCHEMA = {
    "k": (int, 1),
    "tau": (float, _REQUIRED),
    "eta": (float, 0.01),
    "eta_thresh": (float, 0.01),
    "theta_open": (float, 0.001),
    "theta_init": (float, 0.001),
    "c": (float, 1.0),
}

_SPLIT_SCHEMAS = {
    "none": {},
    "holdout": {"train_fraction": (float, _REQUIRED)},
    "kfold": {"folds": (int, _REQUIRED)},
}

PRESET_NAMES = (
    "iris_50",
    "iris_75",
    "random_pattern",
    "morse_names",
    "morse_positional",
    "morse_sonnet",
)


def _apply_schema(section, schema, where: str) -> dict:
    if not isinstance(section, dict):
        raise ConfigError(f"{where}: expected an object, got {type(section).__name__}")
    unknown = sorted(set(section) - set(schema))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}")
    out = {}
    for key, (typ, default) in schema.items():
        if key in section:
            value = section[key]
            if value is not None and typ is not None:
                if typ is float and isinstance(value, (int, float)) and not isinstance(value, bool):
                    value = float(value)
                elif not isinstance(value, typ) or isinstance(value, bool):
                    raise ConfigError(
                        f"{where}.{key}: expected {typ.__name__}, got {type(value).__name__}"
                    )
            out[key] = value
        elif default is _REQUIRED:
            raise ConfigError(f"{where}: missing required key {key!r}")
        else:
            out[key] = default
    return out


@dataclass
class ExperimentConfig:
    """A fully validated experiment: all defaults filled in."""

    dataset: dict
    network: dict
    split: dict
    epochs: int
    seeds: list

    def to_dict(self) -> dict:
        return {
            "version": CONFIG_VERSION,
            "dataset": self.dataset,
            "network": self.network,
            "split": self.split,
            "epochs": self.epochs,
            "seeds": list(self.seeds),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config root must be an object")
        unknown = sorted(set(doc) - {"version", "dataset", "network", "split", "epochs", "seeds"})
        if unknown:
            raise ConfigError(f"config: unknown key(s) {unknown}")
        version = doc.get("version")
        if version != CONFIG_VERSION:
            raise ConfigError(f"config: unsupported version {version!r}, expected {CONFIG_VERSION}")
        for key in ("dataset", "network", "epochs"):
            if key not in doc:
                raise ConfigError(f"config: missing required section {key!r}")

        dataset_raw = doc["dataset"]
        if not isinstance(dataset_raw, dict) or "kind" not in dataset_raw:
            raise ConfigError("config.dataset: missing 'kind'")
        kind = dataset_raw["kind"]
        if kind not in _DATASET_SCHEMAS:
            raise ConfigError(
                f"config.dataset.kind: unknown kind {kind!r} "
                f"(expected one of {sorted(_DATASET_SCHEMAS)})"
            )
        body = {k: v for k, v in dataset_raw.items() if k != "kind"}
        dataset = {"kind": kind, **_apply_schema(body, _DATASET_SCHEMAS[kind], "config.dataset")}
        if kind == "morse":
            if (dataset["task"] is None) == (dataset["vocabulary"] is None):
                raise ConfigError("config.dataset: set exactly one of 'task' or 'vocabulary'")

        network_raw = doc["network"]
        if not isinstance(network_raw, dict):
            raise ConfigError("config.network: expected an object")
        unknown = sorted(set(network_raw) - {"hidden", "output"})
        if unknown:
            raise ConfigError(f"config.network: unknown key(s) {unknown}")
        if "output" not in network_raw:
            raise ConfigError("config.network: missing 'output'")
        hidden_raw = network_raw.get("hidden", [])
        if not isinstance(hidden_raw, list):
            raise ConfigError("config.network.hidden: expected a list")
        hidden = [
            _apply_schema(h, _HIDDEN_SCHEMA, f"config.network.hidden[{i}]")
            for i, h in enumerate(hidden_raw)
        ]
        output = _apply_schema(network_raw["output"], _OUTPUT_SCHEMA, "config.network.output")

        split_raw = doc.get("split", {"kind": "none"})
        if not isinstance(split_raw, dict) or "kind" not in split_raw:
            raise ConfigError("config.split: missing 'kind'")
        skind = split_raw["kind"]
        if skind not in _SPLIT_SCHEMAS:
            raise ConfigError(
                f"config.split.kind: unknown kind {skind!r} (expected one of {sorted(_SPLIT_SCHEMAS)})"
            )
        sbody = {k: v for k, v in split_raw.items() if k != "kind"}
        split = {"kind": skind, **_apply_schema(sbody, _SPLIT_SCHEMAS[skind], "config.split")}
        if skind == "holdout" and not 0 < split["train_fraction"] < 1:
            raise ConfigError("config.split.train_fraction must be in (0, 1)")
        if skind == "kfold" and split["folds"] < 2:
            raise ConfigError("config.split.folds must be >= 2")

        epochs = doc["epochs"]
        if not isinstance(epochs, int) or isinstance(epochs, bool) or epochs < 1:
            raise ConfigError("config.epochs must be a positive integer")
        seeds = doc.get("seeds", [0])
        if (
            not isinstance(seeds, list)
            or not seeds
            or not all(isinstance(s, int) and not isinstance(s, bool) and s >= 0 for s in seeds)
        ):
            raise ConfigError("config.seeds must be a non-empty list of non-negative integers")

        return cls(dataset=dataset, network={"hidden": hidden, "output": output},
                   split=split, epochs=epochs, seeds=list(seeds))


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return ExperimentConfig.from_dict(doc)


def load_preset(name: str) -> ExperimentConfig:
    """Load one of the bundled experiment configs by name."""
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r} (expected one of {PRESET_NAMES})")
    ref = resources.files("odesa.configs").joinpath(f"{name}.json")
    with ref.open("r", encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(json.load(fh))
