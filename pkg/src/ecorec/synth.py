"""Planted-partition synthetic corpus generator.

Regions, patterns and features are assigned to clusters round-robin. Each
region links to every feature of its cluster plus ~10% cross-cluster noise
links; a region interacts with a pattern with probability p_in inside its
cluster and p_out outside. Pattern modality vectors are the cluster centroid
plus Gaussian noise. Everything is a deterministic function of the seed.
"""

from dataclasses import dataclass

import numpy as np

from .data import (Dataset, FeatureMatrix, Kind, Triple, Vocab,
                   save_feature_matrix, save_interactions, save_triples)

# mirrors the corpus convention of ~29 feature categories
MAX_RELATION_TYPES = 29


@dataclass
class SyntheticData:
    vocab: Vocab
    triples: list
    relations: list
    positives: dict
    text: FeatureMatrix
    image: FeatureMatrix
    region_clusters: np.ndarray
    pattern_clusters: np.ndarray
    feature_clusters: np.ndarray

    def dataset(self):
        return Dataset(vocab=self.vocab, triples=self.triples, relations=self.relations,
                       positives=self.positives, text=self.text, image=self.image)

    def save(self, triples_path, interactions_path, text_path, image_path):
        save_triples(triples_path, self.triples, self.vocab, self.relations)
        save_interactions(interactions_path, self.positives, self.vocab)
        save_feature_matrix(text_path, self.text, self.vocab)
        save_feature_matrix(image_path, self.image, self.vocab)

    def save_clusters(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for r, c in enumerate(self.region_clusters):
                fh.write(f"region\t{self.vocab.name(Kind.REGION, r)}\t{c}\n")
            for p, c in enumerate(self.pattern_clusters):
                fh.write(f"pattern\t{self.vocab.name(Kind.PATTERN, p)}\t{c}\n")
            for f, c in enumerate(self.feature_clusters):
                fh.write(f"feature\t{self.vocab.name(Kind.FEATURE, f)}\t{c}\n")


def gen_synthetic(cfg):
    """Generate a synthetic corpus from a GenConfig; fully seeded."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    k = cfg.n_clusters

    vocab = Vocab()
    for i in range(cfg.n_regions):
        vocab.intern(Kind.REGION, f"R{i}")
    for j in range(cfg.n_patterns):
        vocab.intern(Kind.PATTERN, f"P{j}")
    for f in range(cfg.n_features):
        vocab.intern(Kind.FEATURE, f"F{f}")

    region_clusters = np.arange(cfg.n_regions) % k
    pattern_clusters = np.arange(cfg.n_patterns) % k
    feature_clusters = np.arange(cfg.n_features) % k

    n_relations = min(MAX_RELATION_TYPES, cfg.n_features)
    relations = [f"rel{t}" for t in range(n_relations)]
    relation_of_feature = np.arange(cfg.n_features) % n_relations

    features_by_cluster = [np.flatnonzero(feature_clusters == c) for c in range(k)]
    triples = []
    for r in range(cfg.n_regions):
        c = region_clusters[r]
        in_cluster = features_by_cluster[c]
        out_pool = np.flatnonzero(feature_clusters != c)
        n_noise = min(max(1, round(0.1 * in_cluster.size)), out_pool.size)
        noise = rng.choice(out_pool, size=n_noise, replace=False) if n_noise else []
        for f in list(in_cluster) + sorted(noise):
            triples.append(Triple(r, int(relation_of_feature[f]), int(f)))

    same = region_clusters[:, None] == pattern_clusters[None, :]
    prob = np.where(same, cfg.p_in, cfg.p_out)
    hits = rng.random((cfg.n_regions, cfg.n_patterns)) < prob
    positives = {}
    for r, p in zip(*np.nonzero(hits)):
        positives.setdefault(int(r), set()).add(int(p))

    def modality(name, dim):
        centroids = rng.normal(0.0, 1.0, size=(k, dim))
        noise = rng.normal(0.0, 1.0, size=(cfg.n_patterns, dim)) * cfg.feature_noise
        matrix = centroids[pattern_clusters] + noise
        matrix.flags.writeable = False
        return FeatureMatrix(name, matrix)

    text = modality("text", cfg.text_dim)
    image = modality("image", cfg.image_dim)

    return SyntheticData(
        vocab=vocab,
        triples=triples,
        relations=relations,
        positives=positives,
        text=text,
        image=image,
        region_clusters=region_clusters,
        pattern_clusters=pattern_clusters,
        feature_clusters=feature_clusters,
    )
