import numpy as np
import pytest

from ecorec.errors import ConfigError, EvaluationError
from ecorec.evaluate import (EvalReport, evaluate, evaluate_scores,
                             metrics_at_k, rank_topk)
from ecorec.model import ModelContext
from ecorec.params import TrainConfig, VariantSpec, init_params

from conftest import make_dataset
from ecorec.data import split_interactions
from ecorec.graph import build_graph


class TestRankTopK:
    def test_all_equal_scores_tie_break_by_index(self):
        assert rank_topk(np.ones(6), 3) == [0, 1, 2]

    def test_hand_sort(self):
        assert rank_topk(np.array([0.1, 0.9, 0.5]), 2) == [1, 2]

    def test_exclusion_promotes_next_best(self):
        scores = np.array([0.1, 0.9, 0.5])
        assert rank_topk(scores, 2, exclusions={1}) == [2, 0]
        assert 1 not in rank_topk(scores, 2, exclusions={1})

    def test_k_too_large(self):
        with pytest.raises(ConfigError):
            rank_topk(np.ones(4), 4, exclusions={0})

    def test_constant_shift_keeps_ranking(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            scores = rng.normal(size=12)
            assert rank_topk(scores, 5) == rank_topk(scores + 3.7, 5)

    def test_positive_scaling_keeps_ranking(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            scores = rng.normal(size=12)
            assert rank_topk(scores, 5) == rank_topk(scores * 10.0, 5)


class TestMetricsAtK:
    def test_perfect(self):
        p, r, f1 = metrics_at_k([0, 1, 2, 3, 4], {0, 1, 2, 3, 4}, 5)
        assert (p, r, f1) == (1.0, 1.0, 1.0)

    def test_hand_case(self):
        p, r, f1 = metrics_at_k([0, 1, 2, 3, 4], {0, 1, 7, 9}, 5)
        assert abs(p - 0.4) < 1e-12 and abs(r - 0.5) < 1e-12
        assert abs(f1 - 2 * 0.4 * 0.5 / 0.9) < 1e-12

    def test_no_hits(self):
        assert metrics_at_k([5, 6], {0, 1}, 2) == (0.0, 0.0, 0.0)

    def test_bounds_and_recall_monotonicity(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            n = int(rng.integers(5, 20))
            scores = rng.normal(size=n)
            relevant = set(map(int, rng.choice(n, size=rng.integers(1, n), replace=False)))
            prev_recall = 0.0
            for k in range(1, n + 1):
                topk = rank_topk(scores, k)
                p, r, f1 = metrics_at_k(topk, relevant, k)
                assert 0.0 <= p <= 1.0 and 0.0 <= r <= 1.0 and 0.0 <= f1 <= 1.0
                assert r >= prev_recall - 1e-15
                prev_recall = r
            assert prev_recall == 1.0  # recall@|P| with no exclusions

    def test_against_bruteforce_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            n = int(rng.integers(2, 21))
            k = int(rng.integers(1, min(10, n) + 1))
            scores = rng.normal(size=n)
            relevant = set(map(int, rng.choice(n, size=rng.integers(1, n + 1),
                                               replace=False)))
            topk = rank_topk(scores, k)
            p, r, f1 = metrics_at_k(topk, relevant, k)
            hits = sum(1 for item in topk if item in relevant)
            assert abs(p - hits / k) < 1e-12
            assert abs(r - hits / len(relevant)) < 1e-12


class TestEvaluateScores:
    def test_single_region_perfect(self):
        scores = np.array([[5.0, 4.0, 0.0, 0.0]])
        report = evaluate_scores(scores, {0: {0, 1}}, {}, 2)
        assert report.precision_at_k == 1.0
        assert report.recall_at_k == 1.0
        assert report.f1_at_k == 1.0
        assert report.regions_evaluated == 1

    def test_oracle_scores_closed_form_recall(self):
        rng = np.random.default_rng(4)
        n_regions, n_patterns, k = 12, 15, 5
        relevant = {r: set(map(int, rng.choice(n_patterns,
                                               size=rng.integers(1, 9),
                                               replace=False)))
                    for r in range(n_regions)}
        scores = np.zeros((n_regions, n_patterns))
        for r, pats in relevant.items():
            scores[r, sorted(pats)] = 1.0
        report = evaluate_scores(scores, relevant, {}, k)
        expect = np.mean([min(k, len(p)) / len(p) for p in relevant.values()])
        assert abs(report.recall_at_k - expect) < 1e-12

    def test_f1_is_harmonic_mean_of_macro_averages(self):
        rng = np.random.default_rng(5)
        scores = rng.normal(size=(8, 10))
        relevant = {r: set(map(int, rng.choice(10, size=3, replace=False)))
                    for r in range(8)}
        report = evaluate_scores(scores, relevant, {}, 4)
        p, r = report.precision_at_k, report.recall_at_k
        expect = 0.0 if p + r == 0 else 2 * p * r / (p + r)
        assert abs(report.f1_at_k - expect) < 1e-15

    def test_exclusions_never_ranked(self):
        rng = np.random.default_rng(6)
        scores = rng.normal(size=(5, 12))
        relevant = {r: {int(rng.integers(12))} for r in range(5)}
        exclusions = {r: set(map(int, rng.choice(12, size=4, replace=False)))
                      for r in range(5)}
        relevant = {r: pats - exclusions[r] or {0} for r, pats in relevant.items()}
        report = evaluate_scores(scores, relevant, exclusions, 3)
        for row in report.per_region:
            region = row["region"]
            assert not (set(row["top_k"]) & exclusions[region])

    def test_empty_relevant_raises(self):
        with pytest.raises(EvaluationError):
            evaluate_scores(np.zeros((2, 3)), {0: set()}, {}, 1)

    def test_report_deterministic(self):
        rng = np.random.default_rng(7)
        scores = rng.normal(size=(4, 9))
        relevant = {r: {r, r + 1} for r in range(4)}
        a = evaluate_scores(scores, relevant, {}, 3)
        b = evaluate_scores(scores, relevant, {}, 3)
        assert a.to_json() == b.to_json()


class TestEvaluateEndToEnd:
    def build(self):
        ds = make_dataset(n_regions=8, n_patterns=10, seed=9)
        ds.positives.update({r: set(range(r % 3 + 2)) for r in range(8)})
        split = split_interactions(ds.positives, seed=0)
        kg = build_graph(ds.triples, 8, ds.vocab.n_features, ds.n_relations)
        cfg = TrainConfig(embedding_dim=8, layers=1, seed=0)
        ctx = ModelContext.build(ds, kg, cfg, VariantSpec.from_code("SIT"))
        params = init_params(cfg, ctx.shapes())
        return split, params, ctx

    def test_report_names_and_invariants(self):
        split, params, ctx = self.build()
        report = evaluate(split, params, ctx, 3)
        assert report.regions_evaluated == len(
            [r for r, t in split.test.items() if t])
        for row in report.per_region:
            assert row["region"].startswith("R")
            assert all(name.startswith("P") for name in row["top_k"])
            assert len(row["top_k"]) == 3

    def test_empty_test_split_raises(self):
        split, params, ctx = self.build()
        split.test.clear()
        with pytest.raises(EvaluationError):
            evaluate(split, params, ctx, 3)
