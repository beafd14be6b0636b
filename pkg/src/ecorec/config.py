"""Flat ``key = value`` run configuration with defaults and strict keys."""

import os
from dataclasses import dataclass

from .data import GenConfig
from .errors import ConfigError, ParseError
from .params import TrainConfig, VariantSpec


def _parse_bool(text):
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_str_list(text):
    return [part.strip() for part in text.split(",") if part.strip()]


_TYPES = {
    "str": str,
    "int": int,
    "float": float,
    "bool": _parse_bool,
    "list": _parse_str_list,
}

# key -> (type, default); None default means "unset unless provided"
SCHEMA = {
    "out": ("str", None),
    "triples": ("str", None),
    "interactions": ("str", None),
    "text_features": ("str", None),
    "image_features": ("str", None),
    "checkpoint": ("str", None),
    # generator
    "n_regions": ("int", None),
    "n_patterns": ("int", None),
    "n_features": ("int", None),
    "n_clusters": ("int", None),
    "p_in": ("float", None),
    "p_out": ("float", None),
    "feature_noise": ("float", 0.1),
    "text_dim": ("int", 32),
    "image_dim": ("int", 64),
    # training
    "embedding_dim": ("int", 64),
    "layers": ("int", 3),
    "learning_rate": ("float", 1e-3),
    "batch_size": ("int", 128),
    "negatives_per_positive": ("int", 1),
    "l2_coeff": ("float", 1e-4),
    "epochs": ("int", 200),
    "patience": ("int", 10),
    "seed": ("int", 0),
    "k": ("int", 5),
    "min_degree": ("int", 2),
    "fusion.method": ("str", "attention"),
    "fusion.gate_direction": ("str", "image_gates_text"),
    "model.add_pattern_id": ("bool", False),
    "use_spatial": ("bool", True),
    "use_image": ("bool", True),
    "use_text": ("bool", True),
    # experiments
    "variants": ("list", None),
    "sweep.param": ("str", None),
    "sweep.values": ("list", None),
}

REQUIRED = {
    "gen": ("out", "n_regions", "n_patterns", "n_features", "n_clusters", "p_in", "p_out"),
    "train": ("out",),
    "eval": ("out",),
    "recommend": ("out",),
    "ablate": ("out",),
    "sweep": ("out", "sweep.param", "sweep.values"),
    "stats": ("out",),
}

_DEFAULT_FILES = {
    "triples": "triples.tsv",
    "interactions": "interactions.tsv",
    "text_features": "text_features.tsv",
    "image_features": "image_features.tsv",
    "checkpoint": "checkpoint.bin",
}


def parse_config_file(path):
    """Read ``key = value`` lines; '#' starts a comment."""
    raw = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ParseError(f"{path}:{lineno}: expected 'key = value'")
            key, value = stripped.split("=", 1)
            raw[key.strip()] = value.strip()
    return raw


@dataclass
class RunConfig:
    values: dict

    @classmethod
    def build(cls, command, file_values=None, overrides=None):
        """Validate raw string maps against the schema; reports all problems."""
        raw = {}
        raw.update(file_values or {})
        raw.update(overrides or {})
        errors = []
        values = {}
        for key, text in raw.items():
            if key not in SCHEMA:
                errors.append(f"unknown key {key!r}")
                continue
            type_name, _ = SCHEMA[key]
            try:
                values[key] = _TYPES[type_name](text) if isinstance(text, str) else text
            except ValueError:
                errors.append(f"key {key!r}: cannot parse {text!r} as {type_name}")
        for key, (_, default) in SCHEMA.items():
            values.setdefault(key, default)
        missing = [key for key in REQUIRED.get(command, ()) if values.get(key) is None]
        if missing:
            errors.append(f"missing required keys: {', '.join(sorted(missing))}")
        if errors:
            raise ConfigError("; ".join(errors))
        return cls(values)

    def __getitem__(self, key):
        return self.values[key]

    def path(self, key):
        """File path for a key, defaulting to a well-known name under out/."""
        value = self.values.get(key)
        if value is not None:
            return value
        if key in _DEFAULT_FILES and self.values.get("out"):
            return os.path.join(self.values["out"], _DEFAULT_FILES[key])
        return None

    def gen_config(self):
        return GenConfig(
            n_regions=self["n_regions"],
            n_patterns=self["n_patterns"],
            n_features=self["n_features"],
            n_clusters=self["n_clusters"],
            p_in=self["p_in"],
            p_out=self["p_out"],
            feature_noise=self["feature_noise"],
            text_dim=self["text_dim"],
            image_dim=self["image_dim"],
            seed=self["seed"],
        )

    def train_config(self):
        return TrainConfig(
            embedding_dim=self["embedding_dim"],
            layers=self["layers"],
            learning_rate=self["learning_rate"],
            batch_size=self["batch_size"],
            negatives_per_positive=self["negatives_per_positive"],
            l2_coeff=self["l2_coeff"],
            epochs=self["epochs"],
            patience=self["patience"],
            eval_k=self["k"],
            seed=self["seed"],
            fusion_method=self["fusion.method"],
            gate_direction=self["fusion.gate_direction"],
            add_pattern_id=self["model.add_pattern_id"],
        )

    def variant(self):
        return VariantSpec(self["use_spatial"], self["use_image"], self["use_text"])

    def resolved_text(self):
        """Echo of the effective configuration (defaults filled), sorted."""
        lines = []
        for key in sorted(self.values):
            value = self.values[key]
            if value is None:
                continue
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, list):
                value = ",".join(str(v) for v in value)
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"
