"""Ablation grid and single-parameter sweeps."""

from dataclasses import replace

from .errors import ConfigError
from .evaluate import evaluate
from .model import ModelContext, train
from .params import DEFAULT_VARIANT_GRID, VariantSpec

SWEEPABLE = ("embedding_dim", "batch_size", "layers", "fusion_method")


def train_and_evaluate(dataset, split, cfg, variant, kg=None):
    """One train + test-set evaluation; returns the EvalReport."""
    params, _ = train(dataset, split, cfg, variant, kg=kg)
    ctx = ModelContext.build(dataset, kg, cfg, variant)
    return evaluate(split, params, ctx, cfg.eval_k)


def run_ablation(dataset, split, cfg, variants=None, kg=None):
    """Train and evaluate each variant under the identical config and seed.

    Returns rows of (variant code, precision@k, recall@k, f1@k).
    """
    codes = variants if variants is not None else DEFAULT_VARIANT_GRID
    rows = []
    for code in codes:
        variant = code if isinstance(code, VariantSpec) else VariantSpec.from_code(code)
        report = train_and_evaluate(dataset, split, cfg, variant, kg=kg)
        rows.append((variant.code, report.precision_at_k, report.recall_at_k,
                     report.f1_at_k))
    return rows


def run_sweep(dataset, split, cfg, param, values, variant=None, kg=None):
    """Vary one hyperparameter, all else fixed; rows of (value, f1@k)."""
    if param not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {param!r}; choose one of {SWEEPABLE}")
    if not values:
        raise ConfigError("sweep values must be non-empty")
    variant = variant if variant is not None else VariantSpec()
    rows = []
    for value in values:
        swept = replace(cfg, **{param: value})
        try:
            swept.validate()
        except ValueError as exc:
            raise ConfigError(f"invalid sweep value {value!r} for {param}: {exc}") from exc
        if param == "fusion_method":
            from .fusion import METHODS
            if value not in METHODS:
                raise ConfigError(f"invalid sweep value {value!r} for fusion_method")
        report = train_and_evaluate(dataset, split, swept, variant, kg=kg)
        rows.append((value, report.f1_at_k))
    return rows


def format_table(headers, rows):
    """Aligned-column text table."""
    def fmt(cell):
        return f"{cell:.4f}" if isinstance(cell, float) else str(cell)

    text_rows = [[fmt(c) for c in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in text_rows)) if text_rows else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    for row in text_rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"
