"""Bipartite region-feature knowledge graph: build, prune, aggregate.

Region node v is the region index; feature f maps to node ``n_regions + f``.
Aggregation is relation-agnostic layered mean: per layer,
``e_next = leaky_relu((e + mean_neighbors(e)) @ W)``, and the region
representation is the sum of all layer outputs (including layer 0, the raw
ID embeddings). The mean over an empty neighbor set is the zero vector.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError

LEAKY_SLOPE = 0.2


@dataclass
class KnowledgeGraph:
    n_regions: int
    n_features: int
    n_relations: int
    indptr: np.ndarray   # CSR over all nodes, int64
    indices: np.ndarray  # neighbor node ids, int64
    rels: np.ndarray     # relation type per directed edge
    feature_ids: np.ndarray  # original feature index of each feature node

    @property
    def n_nodes(self):
        return self.n_regions + self.n_features

    @property
    def n_edges(self):
        """Undirected edge count."""
        return self.indices.shape[0] // 2

    def degree(self, node):
        return int(self.indptr[node + 1] - self.indptr[node])

    def neighbors(self, node):
        return self.indices[self.indptr[node]:self.indptr[node + 1]]

    def feature_degrees(self):
        return np.diff(self.indptr)[self.n_regions:]


def _freeze(kg):
    for arr in (kg.indptr, kg.indices, kg.rels, kg.feature_ids):
        arr.flags.writeable = False
    return kg


def _from_edges(n_regions, n_features, n_relations, heads, rels, tails, feature_ids):
    """Assemble a symmetric CSR from directed region->feature edges."""
    n = n_regions + n_features
    src = np.concatenate([heads, tails + n_regions])
    dst = np.concatenate([tails + n_regions, heads])
    rel2 = np.concatenate([rels, rels])
    order = np.lexsort((dst, src))
    src, dst, rel2 = src[order], dst[order], rel2[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return _freeze(KnowledgeGraph(
        n_regions=n_regions,
        n_features=n_features,
        n_relations=n_relations,
        indptr=indptr,
        indices=dst.astype(np.int64),
        rels=rel2.astype(np.int64),
        feature_ids=np.asarray(feature_ids, dtype=np.int64),
    ))


def build_graph(triples, n_regions, n_features, n_relations):
    """Build the symmetric bipartite graph; each triple appears once per direction."""
    if not triples:
        raise ValueError("triples must be non-empty")
    heads = np.array([t.head for t in triples], dtype=np.int64)
    rels = np.array([t.relation for t in triples], dtype=np.int64)
    tails = np.array([t.tail for t in triples], dtype=np.int64)
    if heads.min() < 0 or heads.max() >= n_regions:
        raise IndexError("triple head out of range")
    if tails.min() < 0 or tails.max() >= n_features:
        raise IndexError("triple tail out of range")
    if rels.min() < 0 or rels.max() >= n_relations:
        raise IndexError("triple relation out of range")
    return _from_edges(n_regions, n_features, n_relations, heads, rels, tails,
                       np.arange(n_features))


def prune_graph(kg, min_degree):
    """Drop feature nodes with degree < min_degree (regions are never removed).

    Feature degrees depend only on region links, so a single pass suffices;
    surviving feature nodes are reindexed densely.
    """
    if min_degree < 1:
        raise ValueError("min_degree must be >= 1")
    fdeg = kg.feature_degrees()
    keep = fdeg >= min_degree
    if keep.all():
        return kg
    new_of_old = -np.ones(kg.n_features, dtype=np.int64)
    new_of_old[keep] = np.arange(int(keep.sum()))

    # region rows come first in the CSR, so their edges are a prefix
    end = kg.indptr[kg.n_regions]
    deg_r = np.diff(kg.indptr[:kg.n_regions + 1])
    heads = np.repeat(np.arange(kg.n_regions, dtype=np.int64), deg_r)
    tails_old = kg.indices[:end] - kg.n_regions
    rels = kg.rels[:end]
    mask = new_of_old[tails_old] >= 0
    return _from_edges(
        kg.n_regions, int(keep.sum()), kg.n_relations,
        heads[mask], rels[mask], new_of_old[tails_old[mask]],
        kg.feature_ids[keep],
    )


def leaky_relu(z, slope=LEAKY_SLOPE):
    return np.where(z >= 0, z, slope * z)


def leaky_relu_grad(z, slope=LEAKY_SLOPE):
    return np.where(z >= 0, 1.0, slope)


def aggregate_forward(kg, node_emb, weights, layers, slope=LEAKY_SLOPE):
    """Run the layered aggregation; returns (RR, cache for the backward pass)."""
    d = node_emb.shape[1]
    if node_emb.shape[0] != kg.n_nodes:
        raise DimensionError(
            f"node embeddings have {node_emb.shape[0]} rows, graph has {kg.n_nodes} nodes")
    if len(weights) < layers:
        raise DimensionError(f"need {layers} layer weights, got {len(weights)}")
    e = node_emb.astype(np.float64, copy=False)
    layer_out = [e]
    pre_acts = []
    summed = []
    for l in range(layers):
        w = weights[l]
        if w.shape != (d, d):
            raise DimensionError(f"layer {l} weight is {w.shape}, expected {(d, d)}")
        s = e + kernels.mean_neighbors(kg.indptr, kg.indices, np.ascontiguousarray(e))
        z = s @ w
        e = leaky_relu(z, slope)
        summed.append(s)
        pre_acts.append(z)
        layer_out.append(e)
    rr = np.zeros((kg.n_regions, d), dtype=np.float64)
    for e_l in layer_out:
        rr += e_l[:kg.n_regions]
    cache = (kg, weights, layers, slope, layer_out, pre_acts, summed)
    return rr, cache


def aggregate_backward(cache, d_rr):
    """Gradients of the aggregation w.r.t. node embeddings and layer weights."""
    kg, weights, layers, slope, layer_out, pre_acts, summed = cache
    n, d = layer_out[0].shape
    direct = np.zeros((n, d), dtype=np.float64)
    direct[:kg.n_regions] = d_rr
    acc = direct.copy()  # dL/dE^{layers}
    d_weights = [None] * layers
    for l in range(layers - 1, -1, -1):
        dz = acc * leaky_relu_grad(pre_acts[l], slope)
        d_weights[l] = summed[l].T @ dz
        ds = dz @ weights[l].T
        acc = direct + ds + kernels.mean_neighbors_adjoint(
            kg.indptr, kg.indices, np.ascontiguousarray(ds))
    return acc, d_weights


def aggregate_regions(kg, node_emb, weights, layers, slope=LEAKY_SLOPE):
    """Region representation matrix |R| x d (sum of all layer outputs)."""
    rr, _ = aggregate_forward(kg, node_emb, weights, layers, slope)
    return rr
