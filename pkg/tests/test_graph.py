import numpy as np
import pytest

from ecorec.data import Triple
from ecorec.errors import DimensionError
from ecorec.graph import (aggregate_backward, aggregate_forward,
                          aggregate_regions, build_graph, prune_graph)


def star(n_features=3):
    return build_graph([Triple(0, 0, f) for f in range(n_features)], 1, n_features, 1)


def random_graph(rng, n_regions=8, n_features=10, n_relations=4, max_links=5):
    triples = []
    for r in range(n_regions):
        n = rng.integers(1, max_links + 1)
        for f in sorted(rng.choice(n_features, size=n, replace=False)):
            triples.append(Triple(r, int(rng.integers(n_relations)), int(f)))
    return build_graph(triples, n_regions, n_features, n_relations)


class TestBuild:
    def test_single_triple(self):
        kg = build_graph([Triple(0, 0, 0)], 1, 1, 1)
        assert kg.n_nodes == 2 and kg.n_edges == 1
        assert kg.degree(0) == 1 and kg.degree(1) == 1

    def test_star_degree(self):
        kg = star(3)
        assert kg.degree(0) == 3
        assert all(kg.degree(1 + f) == 1 for f in range(3))

    def test_symmetric_adjacency(self):
        rng = np.random.default_rng(5)
        kg = random_graph(rng)
        for v in range(kg.n_nodes):
            for u in kg.neighbors(v):
                assert v in kg.neighbors(u)

    def test_out_of_range_triple(self):
        with pytest.raises(IndexError):
            build_graph([Triple(2, 0, 0)], 1, 1, 1)
        with pytest.raises(IndexError):
            build_graph([Triple(0, 0, 5)], 1, 1, 1)


class TestPrune:
    def test_min_degree_one_is_identity(self):
        kg = star(3)
        assert prune_graph(kg, 1) is kg

    def test_hand_fixture(self):
        # {A-X, B-X, A-Y} with min_degree=2: Y removed, X kept
        triples = [Triple(0, 0, 0), Triple(1, 0, 0), Triple(0, 0, 1)]
        kg = build_graph(triples, 2, 2, 1)
        pruned = prune_graph(kg, 2)
        assert pruned.n_features == 1
        assert pruned.n_regions == 2
        assert pruned.n_edges == 2
        assert list(pruned.feature_ids) == [0]

    def test_all_features_removed(self):
        kg = star(3)
        pruned = prune_graph(kg, 2)
        assert pruned.n_features == 0
        assert pruned.n_regions == 1
        assert pruned.n_edges == 0

    def test_properties_on_random_graphs(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            kg = random_graph(rng)
            min_degree = int(rng.integers(1, 5))
            pruned = prune_graph(kg, min_degree)
            assert pruned.n_regions == kg.n_regions
            if pruned.n_features:
                assert pruned.feature_degrees().min() >= min_degree
            assert pruned.n_edges <= kg.n_edges
            again = prune_graph(pruned, min_degree)
            assert again.n_edges == pruned.n_edges
            assert again.n_features == pruned.n_features


class TestAggregate:
    def test_zero_layers_returns_id_embeddings(self):
        kg = star(3)
        rng = np.random.default_rng(0)
        emb = rng.normal(size=(kg.n_nodes, 4))
        rr = aggregate_regions(kg, emb, [], 0)
        np.testing.assert_array_equal(rr, emb[:1])

    def test_two_node_identity_weights_linear(self):
        # slope=1 makes the activation linear: RR_r = e_r + (e_r + e_f)
        kg = build_graph([Triple(0, 0, 0)], 1, 1, 1)
        emb = np.array([[1.0, 2.0], [10.0, 20.0]])
        rr = aggregate_regions(kg, emb, [np.eye(2)], 1, slope=1.0)
        np.testing.assert_allclose(rr, [[1 + 11, 2 + 22]])

    def test_isolated_region_zero_weights(self):
        triples = [Triple(0, 0, 0)]
        kg = build_graph(triples, 2, 1, 1)  # region 1 is isolated
        rng = np.random.default_rng(1)
        emb = rng.normal(size=(3, 4))
        weights = [np.zeros((4, 4)) for _ in range(3)]
        rr = aggregate_regions(kg, emb, weights, 3)
        np.testing.assert_array_equal(rr[1], emb[1])

    def test_dimension_mismatch(self):
        kg = star(2)
        emb = np.zeros((kg.n_nodes, 4))
        with pytest.raises(DimensionError):
            aggregate_regions(kg, emb, [np.eye(3)], 1)

    def test_locality(self):
        # chain r0 - f0 - r1 - f1 - r2: f1 is 3 hops from r0
        triples = [Triple(0, 0, 0), Triple(1, 0, 0), Triple(1, 0, 1), Triple(2, 0, 1)]
        kg = build_graph(triples, 3, 2, 1)
        rng = np.random.default_rng(2)
        emb = rng.normal(size=(5, 4))
        weights = [rng.normal(size=(4, 4)) for _ in range(2)]
        rr = aggregate_regions(kg, emb, weights, 2)
        emb2 = emb.copy()
        emb2[3 + 1] += 5.0  # feature f1, >2 hops from region 0
        rr2 = aggregate_regions(kg, emb2, weights, 2)
        np.testing.assert_array_equal(rr2[0], rr[0])
        assert not np.array_equal(rr2[2], rr[2])

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(3)
        kg = random_graph(rng, n_regions=5, n_features=6)
        emb = rng.normal(size=(kg.n_nodes, 3))
        weights = [rng.normal(size=(3, 3)) for _ in range(2)]
        rr = aggregate_regions(kg, emb, weights, 2)

        perm_r = rng.permutation(5)
        perm_f = rng.permutation(6)
        # rebuild the graph under the relabeling
        triples = []
        for r in range(5):
            for j in range(kg.indptr[r], kg.indptr[r + 1]):
                f = kg.indices[j] - 5
                triples.append(Triple(int(perm_r[r]), int(kg.rels[j]), int(perm_f[f])))
        kg2 = build_graph(triples, 5, 6, kg.n_relations)
        emb2 = np.empty_like(emb)
        emb2[perm_r] = emb[:5]
        emb2[5 + perm_f] = emb[5:]
        rr2 = aggregate_regions(kg2, emb2, weights, 2)
        np.testing.assert_allclose(rr2[perm_r], rr, atol=1e-12)

    def test_finite_output(self):
        rng = np.random.default_rng(4)
        kg = random_graph(rng)
        emb = rng.normal(size=(kg.n_nodes, 6)) * 10
        weights = [rng.normal(size=(6, 6)) for _ in range(3)]
        rr = aggregate_regions(kg, emb, weights, 3)
        assert np.all(np.isfinite(rr))

    def test_backward_matches_finite_differences(self):
        rng = np.random.default_rng(6)
        kg = random_graph(rng, n_regions=4, n_features=5)
        emb = rng.normal(size=(kg.n_nodes, 3))
        weights = [rng.normal(size=(3, 3)) for _ in range(2)]
        d_rr = rng.normal(size=(4, 3))

        _, cache = aggregate_forward(kg, emb, weights, 2)
        d_emb, d_w = aggregate_backward(cache, d_rr)

        def value(e, ws):
            rr, _ = aggregate_forward(kg, e, ws, 2)
            return float((rr * d_rr).sum())

        h = 1e-6
        for idx in [(0, 0), (3, 2), (kg.n_nodes - 1, 1)]:
            e_p, e_m = emb.copy(), emb.copy()
            e_p[idx] += h
            e_m[idx] -= h
            fd = (value(e_p, weights) - value(e_m, weights)) / (2 * h)
            assert abs(fd - d_emb[idx]) < 1e-6
        for l in range(2):
            w_p = [w.copy() for w in weights]
            w_m = [w.copy() for w in weights]
            w_p[l][1, 2] += h
            w_m[l][1, 2] -= h
            fd = (value(emb, w_p) - value(emb, w_m)) / (2 * h)
            assert abs(fd - d_w[l][1, 2]) < 1e-6
