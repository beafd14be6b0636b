"""All-ranking Top-K evaluation with macro-averaged precision/recall/F1.

Per region, every pattern except the exclusions (train plus validation
positives) is ranked by score; ties break by ascending pattern index. The
report's F1 is the harmonic mean of the macro-averaged precision and recall,
matching how the aggregate tables are usually quoted.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EvaluationError
from .model import score_matrix


def rank_topk(scores, k, exclusions=()):
    """Indices of the k best scores, exclusions removed, ties by index."""
    scores = np.asarray(scores, dtype=np.float64)
    n = scores.shape[0]
    mask = np.zeros(n, dtype=bool)
    excl = list(exclusions)
    if excl:
        mask[excl] = True
    available = n - int(mask.sum())
    if k > available:
        raise ConfigError(f"k={k} exceeds the {available} rankable patterns")
    s = scores.copy()
    s[mask] = -np.inf
    order = np.lexsort((np.arange(n), -s))
    return [int(i) for i in order[:k]]


def metrics_at_k(topk, relevant, k):
    """(precision, recall, f1) of one ranked list against the relevant set."""
    tp = len(set(topk) & set(relevant))
    precision = tp / k
    recall = tp / len(relevant)
    if precision + recall == 0.0:
        return precision, recall, 0.0
    f1 = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1


def _harmonic(p, r):
    return 0.0 if p + r == 0.0 else 2.0 * p * r / (p + r)


@dataclass
class EvalReport:
    k: int
    precision_at_k: float
    recall_at_k: float
    f1_at_k: float
    regions_evaluated: int
    per_region: list

    def to_dict(self):
        return {
            "k": self.k,
            "precision_at_k": self.precision_at_k,
            "recall_at_k": self.recall_at_k,
            "f1_at_k": self.f1_at_k,
            "regions_evaluated": self.regions_evaluated,
            "per_region": self.per_region,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def evaluate_scores(scores, relevant_map, exclusion_map, k, vocab=None):
    """Rank from a precomputed |R| x |P| score matrix and aggregate metrics."""
    from .data import Kind  # local import: avoid cycle at module load

    rows = []
    precisions = []
    recalls = []
    for r in sorted(relevant_map):
        relevant = relevant_map[r]
        if not relevant:
            continue
        exclusions = exclusion_map.get(r, set())
        topk = rank_topk(scores[r], k, exclusions)
        p, rec, _ = metrics_at_k(topk, relevant, k)
        precisions.append(p)
        recalls.append(rec)
        if vocab is not None:
            region_label = vocab.name(Kind.REGION, r)
            topk_labels = [vocab.name(Kind.PATTERN, p_id) for p_id in topk]
        else:
            region_label = r
            topk_labels = topk
        rows.append({
            "region": region_label,
            "tp": len(set(topk) & relevant),
            "n_relevant": len(relevant),
            "top_k": topk_labels,
        })
    if not rows:
        raise EvaluationError("no region has a non-empty relevant set")
    macro_p = float(np.mean(precisions))
    macro_r = float(np.mean(recalls))
    return EvalReport(
        k=k,
        precision_at_k=macro_p,
        recall_at_k=macro_r,
        f1_at_k=_harmonic(macro_p, macro_r),
        regions_evaluated=len(rows),
        per_region=rows,
    )


def evaluate_with(relevant_map, exclusion_map, params, ctx, k):
    scores = score_matrix(params, ctx)
    return evaluate_scores(scores, relevant_map, exclusion_map, k, vocab=ctx.vocab)


def evaluate(split, params, ctx, k):
    """Test-set evaluation: train and validation positives are excluded."""
    if not any(split.test.values()):
        raise EvaluationError("test split is empty")
    exclusions = {}
    for r, pats in split.train.items():
        exclusions.setdefault(r, set()).update(pats)
    for r, pats in split.validation.items():
        exclusions.setdefault(r, set()).update(pats)
    return evaluate_with(split.test, exclusions, params, ctx, k)
