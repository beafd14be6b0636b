"""Scoring, pairwise-ranking loss with exact gradients, and the training loop.

The score of (region, pattern) is the inner product of the region
representation (graph aggregation, or the raw region ID embedding for
non-spatial variants) and the pattern representation (fused modality
features, a single projected modality, or the pattern ID embedding when no
modality is active). Training minimizes

    loss = -sum ln sigmoid(s_pos - s_neg) + l2_coeff * ||theta||^2

over shuffled positive batches with uniformly sampled negatives, using Adam.
All gradients are hand-derived and checked against central finite differences.
"""

import logging
from dataclasses import dataclass

import numpy as np

from . import fusion as fz
from . import graph as gr
from .errors import ConfigError, NumericalError, SamplingError
from .params import ModelShapes, init_params

log = logging.getLogger("ecorec")


@dataclass
class ModelContext:
    """Immutable wiring of one run: graph, raw modality matrices, variant."""

    kg: object
    text: np.ndarray | None
    image: np.ndarray | None
    variant: object
    fusion_method: str
    gate_direction: str
    layers: int
    l2_coeff: float
    add_pattern_id: bool
    n_regions: int
    n_patterns: int
    vocab: object = None

    @classmethod
    def build(cls, dataset, kg, cfg, variant):
        if variant.use_spatial and kg is None:
            raise ConfigError("variant uses spatial features but no knowledge graph was given")
        if variant.use_text and dataset.text is None:
            raise ConfigError("variant uses text features but no text feature file was loaded")
        if variant.use_image and dataset.image is None:
            raise ConfigError("variant uses image features but no image feature file was loaded")
        if cfg.fusion_method not in fz.METHODS:
            raise ConfigError(f"unknown fusion method {cfg.fusion_method!r}")
        if cfg.gate_direction not in fz.GATE_DIRECTIONS:
            raise ConfigError(f"unknown gate direction {cfg.gate_direction!r}")
        return cls(
            kg=kg,
            text=dataset.text.matrix if dataset.text is not None else None,
            image=dataset.image.matrix if dataset.image is not None else None,
            variant=variant,
            fusion_method=cfg.fusion_method,
            gate_direction=cfg.gate_direction,
            layers=cfg.layers,
            l2_coeff=cfg.l2_coeff,
            add_pattern_id=cfg.add_pattern_id,
            n_regions=dataset.vocab.n_regions,
            n_patterns=dataset.vocab.n_patterns,
            vocab=dataset.vocab,
        )

    def shapes(self):
        n_nodes = self.kg.n_nodes if self.kg is not None else self.n_regions
        return ModelShapes(
            n_nodes=n_nodes,
            n_regions=self.n_regions,
            n_patterns=self.n_patterns,
            d_text=self.text.shape[1] if self.text is not None else None,
            d_image=self.image.shape[1] if self.image is not None else None,
        )

    def fusion_params(self, params):
        fp = {"gate_direction": self.gate_direction}
        for name in ("W_concat", "W_attn", "q_attn"):
            if name in params:
                fp[name] = params[name]
        return fp


def forward_reprs(params, ctx):
    """Compute (RR, PR, cache) for every region and pattern."""
    variant = ctx.variant
    if variant.use_spatial:
        rr, agg_cache = gr.aggregate_forward(
            ctx.kg, params["node_emb"], params.agg_weights(), ctx.layers)
    else:
        rr = params["node_emb"][:ctx.n_regions]
        agg_cache = None

    ifeat = tfeat = fusion_cache = None
    if variant.use_image and variant.use_text:
        if ctx.fusion_method == "concat":
            pr, fusion_cache = fz.fuse_forward(
                "concat", None, None, ctx.image, ctx.text, ctx.fusion_params(params))
        else:
            ifeat = fz.project_features(ctx.image, params["W_image"], params["b_image"])
            tfeat = fz.project_features(ctx.text, params["W_text"], params["b_text"])
            pr, fusion_cache = fz.fuse_forward(
                ctx.fusion_method, ifeat, tfeat, ctx.image, ctx.text,
                ctx.fusion_params(params))
    elif variant.use_image:
        pr = fz.project_features(ctx.image, params["W_image"], params["b_image"])
    elif variant.use_text:
        pr = fz.project_features(ctx.text, params["W_text"], params["b_text"])
    else:
        pr = params["pattern_emb"]

    uses_modality = variant.use_image or variant.use_text
    if ctx.add_pattern_id and uses_modality:
        pr = pr + params["pattern_emb"]
    cache = (agg_cache, ifeat, tfeat, fusion_cache)
    return rr, pr, cache


def score_matrix(params, ctx):
    rr, pr, _ = forward_reprs(params, ctx)
    return rr @ pr.T


def score_all(region, params, ctx):
    """Scores of one region against every pattern."""
    rr, pr, _ = forward_reprs(params, ctx)
    return rr[region] @ pr.T


def _backward_reprs(d_rr, d_pr, params, ctx, cache):
    """Propagate representation gradients to parameter gradients."""
    variant = ctx.variant
    agg_cache, ifeat, tfeat, fusion_cache = cache
    grads = {}

    if variant.use_spatial:
        d_node, d_weights = gr.aggregate_backward(agg_cache, d_rr)
        grads["node_emb"] = d_node
        for l, dw in enumerate(d_weights):
            grads[f"W_agg_{l}"] = dw
    else:
        d_node = np.zeros_like(params["node_emb"])
        d_node[:ctx.n_regions] = d_rr
        grads["node_emb"] = d_node

    uses_modality = variant.use_image or variant.use_text
    if ctx.add_pattern_id and uses_modality:
        grads["pattern_emb"] = d_pr.copy()

    if variant.use_image and variant.use_text:
        d_if, d_tf, fusion_grads = fz.fuse_backward(
            ctx.fusion_method, d_pr, ifeat, tfeat, ctx.image, ctx.text,
            ctx.fusion_params(params), fusion_cache)
        grads.update(fusion_grads)
        if d_if is not None:
            grads["W_image"], grads["b_image"] = fz.project_backward(ctx.image, d_if)
        if d_tf is not None:
            grads["W_text"], grads["b_text"] = fz.project_backward(ctx.text, d_tf)
    elif variant.use_image:
        grads["W_image"], grads["b_image"] = fz.project_backward(ctx.image, d_pr)
    elif variant.use_text:
        grads["W_text"], grads["b_text"] = fz.project_backward(ctx.text, d_pr)
    else:
        grads["pattern_emb"] = d_pr.copy()
    return grads


def loss_and_grads(batch, params, ctx):
    """Pairwise logistic ranking loss plus L2, with exact gradients.

    ``batch`` is an integer array of rows (region, positive, negative).
    Returns (loss, dict mapping every tensor name to its gradient).
    """
    batch = np.asarray(batch, dtype=np.int64)
    if batch.ndim != 2 or batch.shape[1] != 3:
        raise ValueError("batch must be an array of (region, positive, negative) rows")
    regions, pos, neg = batch[:, 0], batch[:, 1], batch[:, 2]

    rr, pr, cache = forward_reprs(params, ctx)
    rr_b = rr[regions]
    x = np.einsum("bd,bd->b", rr_b, pr[pos] - pr[neg])
    per_pair = np.logaddexp(0.0, -x)  # -ln sigmoid(x)
    if not np.all(np.isfinite(per_pair)):
        bad = int(np.flatnonzero(~np.isfinite(per_pair))[0])
        raise NumericalError(f"non-finite loss at batch index {bad} "
                             f"(region={regions[bad]}, pos={pos[bad]}, neg={neg[bad]})")
    loss = float(per_pair.sum())

    # d(-ln sigmoid(x))/dx = sigmoid(x) - 1
    dx = fz.sigmoid(x) - 1.0
    d_rr = np.zeros_like(rr)
    np.add.at(d_rr, regions, dx[:, None] * (pr[pos] - pr[neg]))
    d_pr = np.zeros((ctx.n_patterns, pr.shape[1]))
    np.add.at(d_pr, pos, dx[:, None] * rr_b)
    np.add.at(d_pr, neg, -dx[:, None] * rr_b)

    grads = _backward_reprs(d_rr, d_pr, params, ctx, cache)

    if ctx.l2_coeff > 0.0:
        loss += ctx.l2_coeff * params.squared_norm()
        for name, tensor in params.tensors.items():
            reg = 2.0 * ctx.l2_coeff * tensor
            grads[name] = grads[name] + reg if name in grads else reg
    else:
        for name, tensor in params.tensors.items():
            if name not in grads:
                grads[name] = np.zeros_like(tensor)
    return loss, grads


def sample_negatives(region, train_positives, n_patterns, rng):
    """One pattern drawn uniformly from P minus the region's train positives."""
    candidates = np.setdiff1d(np.arange(n_patterns), sorted(train_positives))
    if candidates.size == 0:
        raise SamplingError(f"region {region} interacted with every pattern")
    return int(candidates[rng.integers(candidates.size)])


class Adam:
    """Standard Adam (beta1=0.9, beta2=0.999, eps=1e-8) over named tensors."""

    def __init__(self, learning_rate, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {}
        self.v = {}

    def step(self, params, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for name, g in grads.items():
            if name not in self.m:
                self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * (g * g)
            m_hat = m / (1 - b1 ** self.t)
            v_hat = v / (1 - b2 ** self.t)
            params.tensors[name] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _train_pairs(split):
    pairs = [(r, p) for r in sorted(split.train) for p in sorted(split.train[r])]
    return np.array(pairs, dtype=np.int64)


def train(dataset, split, cfg, variant, kg=None):
    """Train a model; returns (best-validation parameters, per-epoch val F1@K).

    When validation is empty the loop runs all epochs and returns the final
    parameters (no early stopping signal exists).
    """
    from .evaluate import evaluate_with  # local import to avoid a cycle

    cfg.validate()
    if kg is None and variant.use_spatial:
        kg = gr.build_graph(dataset.triples, dataset.vocab.n_regions,
                            dataset.vocab.n_features, dataset.n_relations)
    ctx = ModelContext.build(dataset, kg, cfg, variant)
    params = init_params(cfg, ctx.shapes())

    ss = np.random.SeedSequence(cfg.seed)
    shuffle_rng, neg_rng = [np.random.default_rng(s) for s in ss.spawn(2)]

    pairs = _train_pairs(split)
    complements = {}
    skipped = []
    for r in sorted(split.train):
        comp = np.setdiff1d(np.arange(ctx.n_patterns), sorted(split.train[r]))
        if comp.size == 0:
            skipped.append(r)
        else:
            complements[r] = comp
    if skipped:
        log.warning("skipping %d region(s) with no negative candidates: %s",
                    len(skipped), skipped[:10])
        pairs = pairs[np.isin(pairs[:, 0], skipped, invert=True)]
    if pairs.size == 0:
        raise ValueError("no trainable positives after filtering")

    has_validation = bool(split.validation)
    best_params = params.copy()
    best_f1 = -np.inf
    wait = 0
    history = []
    opt = Adam(cfg.learning_rate)

    for _epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(pairs.shape[0])
        for start in range(0, order.size, cfg.batch_size):
            chunk = pairs[order[start:start + cfg.batch_size]]
            if cfg.negatives_per_positive > 1:
                chunk = np.repeat(chunk, cfg.negatives_per_positive, axis=0)
            negs = np.empty(chunk.shape[0], dtype=np.int64)
            for i, r in enumerate(chunk[:, 0]):
                comp = complements[int(r)]
                negs[i] = comp[neg_rng.integers(comp.size)]
            batch = np.column_stack([chunk[:, 0], chunk[:, 1], negs])
            loss, grads = loss_and_grads(batch, params, ctx)
            opt.step(params, grads)

        if has_validation:
            report = evaluate_with(split.validation, split.train, params, ctx, cfg.eval_k)
            history.append(report.f1_at_k)
            if report.f1_at_k > best_f1:
                best_f1 = report.f1_at_k
                best_params = params.copy()
                wait = 0
            else:
                wait += 1
                if wait >= cfg.patience:
                    break

    if not has_validation:
        return params, history
    return best_params, history


def check_gradients(params, batch, ctx, h=1e-4, coords_per_tensor=200, rng=None):
    """Compare analytic gradients against central finite differences.

    Samples up to ``coords_per_tensor`` coordinates per tensor (all of them
    for small tensors) and returns (max relative error, per-tensor errors).
    The relative error uses a magnitude floor so that coordinates whose true
    gradient sits below the finite-difference noise floor do not dominate.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    floor = 1e-3
    _, analytic = loss_and_grads(batch, params, ctx)

    def loss_at():
        value, _ = loss_and_grads(batch, params, ctx)
        return value

    per_tensor = {}
    for name in params.names():
        tensor = params.tensors[name]
        size = tensor.size
        if size <= coords_per_tensor:
            coords = np.arange(size)
        else:
            coords = rng.choice(size, size=coords_per_tensor, replace=False)
        flat = tensor.reshape(-1)
        g_flat = analytic[name].reshape(-1)
        worst = 0.0
        for c in coords:
            old = flat[c]
            flat[c] = old + h
            f_plus = loss_at()
            flat[c] = old - h
            f_minus = loss_at()
            flat[c] = old
            numeric = (f_plus - f_minus) / (2.0 * h)
            a = g_flat[c]
            denom = max(abs(a), abs(numeric), floor)
            worst = max(worst, abs(a - numeric) / denom)
        per_tensor[name] = worst
    return max(per_tensor.values()), per_tensor
