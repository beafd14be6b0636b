import numpy as np
import pytest

from ecorec.data import Dataset, FeatureMatrix, Kind, Triple, Vocab
from ecorec.graph import build_graph


def make_vocab(n_regions, n_patterns, n_features):
    vocab = Vocab()
    for i in range(n_regions):
        vocab.intern(Kind.REGION, f"R{i}")
    for j in range(n_patterns):
        vocab.intern(Kind.PATTERN, f"P{j}")
    for f in range(n_features):
        vocab.intern(Kind.FEATURE, f"F{f}")
    return vocab


def make_dataset(n_regions=6, n_patterns=5, n_features=8, d_text=7, d_image=9,
                 n_relations=3, seed=7):
    """Small random dataset with both modalities and a connected graph."""
    rng = np.random.default_rng(seed)
    vocab = make_vocab(n_regions, n_patterns, n_features)
    triples = []
    for r in range(n_regions):
        for f in sorted(rng.choice(n_features, size=3, replace=False)):
            triples.append(Triple(r, int(f) % n_relations, int(f)))
    positives = {r: {r % n_patterns, (r + 1) % n_patterns} for r in range(n_regions)}
    return Dataset(
        vocab=vocab,
        triples=triples,
        relations=[f"rel{t}" for t in range(n_relations)],
        positives=positives,
        text=FeatureMatrix("text", rng.normal(size=(n_patterns, d_text))),
        image=FeatureMatrix("image", rng.normal(size=(n_patterns, d_image))),
    )


def gradcheck_fixture():
    """Frozen fixture for finite-difference checks: 6 regions, 5 patterns,
    8 features, both modalities, plus a batch covering every region."""
    dataset = make_dataset(n_regions=6, n_patterns=5, n_features=8,
                           d_text=7, d_image=9, seed=7)
    kg = build_graph(dataset.triples, 6, 8, dataset.n_relations)
    batch = np.array([[0, 1, 2], [1, 2, 3], [2, 3, 4],
                      [3, 4, 0], [4, 0, 1], [5, 1, 3]])
    return dataset, kg, batch


@pytest.fixture
def small_dataset():
    return make_dataset()


@pytest.fixture
def small_kg(small_dataset):
    ds = small_dataset
    return build_graph(ds.triples, ds.vocab.n_regions, ds.vocab.n_features,
                       ds.n_relations)
