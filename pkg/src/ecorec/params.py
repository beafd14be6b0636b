"""Trainable tensors, run configuration and the checkpoint container."""

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import DimensionError, ParseError

CHECKPOINT_MAGIC = b"ECORECKPT1\n"


@dataclass(frozen=True)
class VariantSpec:
    """Which information sources the model uses (ablation switch)."""

    use_spatial: bool = True
    use_image: bool = True
    use_text: bool = True

    def __post_init__(self):
        if not (self.use_spatial or self.use_image or self.use_text):
            raise ValueError("at least one of spatial/image/text must be enabled")

    @property
    def code(self):
        return ("S" if self.use_spatial else "") + ("I" if self.use_image else "") \
            + ("T" if self.use_text else "")

    @classmethod
    def from_code(cls, code):
        upper = code.upper()
        if not upper or set(upper) - set("SIT"):
            raise ValueError(f"variant code must be a non-empty subset of 'SIT', got {code!r}")
        return cls("S" in upper, "I" in upper, "T" in upper)


DEFAULT_VARIANT_GRID = ("S", "I", "T", "SI", "ST", "IT", "SIT")


@dataclass
class TrainConfig:
    embedding_dim: int = 64
    layers: int = 3
    learning_rate: float = 1e-3
    batch_size: int = 128
    negatives_per_positive: int = 1
    l2_coeff: float = 1e-4
    epochs: int = 200
    patience: int = 10
    eval_k: int = 5
    seed: int = 0
    fusion_method: str = "attention"
    gate_direction: str = "image_gates_text"
    add_pattern_id: bool = False

    def validate(self):
        for name in ("embedding_dim", "batch_size", "negatives_per_positive"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("layers", "epochs", "patience", "l2_coeff"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class ModelShapes:
    n_nodes: int      # knowledge-graph nodes (regions first)
    n_regions: int
    n_patterns: int
    d_text: int | None = None
    d_image: int | None = None


def xavier_bound(fan_in, fan_out):
    return np.sqrt(6.0 / (fan_in + fan_out))


class ModelParameters:
    """Named tensor bag: ID embeddings, aggregation, projection, fusion weights."""

    def __init__(self, tensors, dim, layers, shapes):
        self.tensors = tensors
        self.dim = dim
        self.layers = layers
        self.shapes = shapes

    def __getitem__(self, name):
        return self.tensors[name]

    def __contains__(self, name):
        return name in self.tensors

    def names(self):
        return sorted(self.tensors)

    def agg_weights(self):
        return [self.tensors[f"W_agg_{l}"] for l in range(self.layers)]

    def copy(self):
        return ModelParameters({k: v.copy() for k, v in self.tensors.items()},
                               self.dim, self.layers, self.shapes)

    def squared_norm(self):
        return float(sum(np.sum(v * v) for v in self.tensors.values()))

    def all_finite(self):
        return all(np.all(np.isfinite(v)) for v in self.tensors.values())


def init_params(cfg, shapes, rng=None):
    """Xavier-uniform weights, uniform[-0.1, 0.1] embeddings, zero biases.

    Tensors are drawn in sorted-name order so a seed pins every value.
    """
    cfg.validate()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    d = cfg.embedding_dim

    specs = {
        "node_emb": ("emb", (shapes.n_nodes, d)),
        "pattern_emb": ("emb", (shapes.n_patterns, d)),
    }
    for l in range(cfg.layers):
        specs[f"W_agg_{l}"] = ("xavier", (d, d))
    if shapes.d_text is not None:
        specs["W_text"] = ("xavier", (shapes.d_text, d))
        specs["b_text"] = ("zeros", (d,))
    if shapes.d_image is not None:
        specs["W_image"] = ("xavier", (shapes.d_image, d))
        specs["b_image"] = ("zeros", (d,))
    if shapes.d_text is not None and shapes.d_image is not None:
        specs["W_concat"] = ("xavier", (shapes.d_image + shapes.d_text, d))
    specs["W_attn"] = ("xavier", (d, d))
    specs["q_attn"] = ("xavier_vec", (d,))

    tensors = {}
    for name in sorted(specs):
        kind, shape = specs[name]
        if kind == "emb":
            tensors[name] = rng.uniform(-0.1, 0.1, size=shape)
        elif kind == "xavier":
            bound = xavier_bound(shape[0], shape[1])
            tensors[name] = rng.uniform(-bound, bound, size=shape)
        elif kind == "xavier_vec":
            bound = xavier_bound(shape[0], 1)
            tensors[name] = rng.uniform(-bound, bound, size=shape)
        else:
            tensors[name] = np.zeros(shape)
    return ModelParameters(tensors, d, cfg.layers, shapes)


def save_checkpoint(path, params, cfg, variant):
    """Versioned binary container: JSON header + raw float64 tensor bytes."""
    names = params.names()
    header = {
        "version": 1,
        "dim": params.dim,
        "layers": params.layers,
        "shapes": asdict(params.shapes),
        "config": asdict(cfg),
        "variant": asdict(variant),
        "tensors": {n: list(params.tensors[n].shape) for n in names},
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(len(blob).to_bytes(8, "little"))
        fh.write(blob)
        for n in names:
            fh.write(np.ascontiguousarray(params.tensors[n], dtype=np.float64).tobytes())


def load_checkpoint(path):
    """Returns (params, cfg, variant); validates the header and tensor shapes."""
    with open(path, "rb") as fh:
        magic = fh.read(len(CHECKPOINT_MAGIC))
        if magic != CHECKPOINT_MAGIC:
            raise ParseError(f"{path}: not a checkpoint file")
        size = int.from_bytes(fh.read(8), "little")
        header = json.loads(fh.read(size).decode("utf-8"))
        tensors = {}
        for name in sorted(header["tensors"]):
            shape = tuple(header["tensors"][name])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise ParseError(f"{path}: truncated tensor {name!r}")
            tensors[name] = np.frombuffer(buf, dtype=np.float64).reshape(shape).copy()
        if fh.read(1):
            raise ParseError(f"{path}: trailing bytes after tensors")
    cfg = TrainConfig(**header["config"])
    variant = VariantSpec(**header["variant"])
    shapes = ModelShapes(**header["shapes"])
    params = ModelParameters(tensors, header["dim"], header["layers"], shapes)
    _validate_shapes(params, cfg, shapes)
    return params, cfg, variant


def _validate_shapes(params, cfg, shapes):
    d = cfg.embedding_dim
    expect = {
        "node_emb": (shapes.n_nodes, d),
        "pattern_emb": (shapes.n_patterns, d),
        "W_attn": (d, d),
        "q_attn": (d,),
    }
    for l in range(cfg.layers):
        expect[f"W_agg_{l}"] = (d, d)
    if shapes.d_text is not None:
        expect["W_text"] = (shapes.d_text, d)
        expect["b_text"] = (d,)
    if shapes.d_image is not None:
        expect["W_image"] = (shapes.d_image, d)
        expect["b_image"] = (d,)
    if shapes.d_text is not None and shapes.d_image is not None:
        expect["W_concat"] = (shapes.d_image + shapes.d_text, d)
    for name, shape in expect.items():
        if name not in params.tensors:
            raise DimensionError(f"checkpoint missing tensor {name!r}")
        got = params.tensors[name].shape
        if got != shape:
            raise DimensionError(f"tensor {name!r} has shape {got}, expected {shape}")
