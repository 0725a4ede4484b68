import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpgraph.metrics import (EvalReport, UndefinedMetricError, aggregate, auprc, auroc,
                               precision_recall_points)

from _helpers import brute_auprc, brute_auroc


class TestAuroc:
    def test_perfect_separation(self):
        assert auroc([0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0]) == 1.0

    def test_all_ties(self):
        assert auroc([0.3] * 6, [1, 0, 1, 0, 0, 1]) == 0.5

    def test_three_item_example(self):
        scores, labels = [0.9, 0.4, 0.6], [1, 0, 1]
        assert auroc(scores, labels) == brute_auroc(scores, labels) == 1.0

    @pytest.mark.parametrize("labels", [[1, 1, 1], [0, 0]])
    def test_single_class_undefined(self, labels):
        with pytest.raises(UndefinedMetricError):
            auroc(np.arange(len(labels)), labels)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            auroc([0.1, 0.2], [1, 2])
        with pytest.raises(ValueError):
            auroc([0.1], [1, 0])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(-500, 500), min_size=4, max_size=30, unique=True), st.integers(0, 2**31))
    def test_monotone_invariance(self, ticks, seed):
        # a coarse grid keeps distinct scores distinct after exp
        y = np.random.default_rng(seed).integers(0, 2, size=len(ticks))
        y[0], y[1] = 0, 1
        s = np.array(ticks) / 100.0
        base = auroc(s, y)
        assert auroc(np.exp(s), y) == base
        assert auroc(3.0 * s + 7.0, y) == base
        assert auroc(s, y) + auroc(-s, y) == pytest.approx(1.0, abs=1e-12)


class TestAuprc:
    def test_perfect_ranking(self):
        assert auprc([0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0]) == 1.0

    def test_positive_ranked_second(self):
        assert auprc([0.1, 0.9], [1, 0]) == 0.5

    def test_no_positives_undefined(self):
        with pytest.raises(UndefinedMetricError):
            auprc([0.1, 0.2], [0, 0])

    def test_random_scores_approach_prevalence(self):
        rng = np.random.default_rng(0)
        y = (rng.random(10_000) < 0.5).astype(int)
        assert abs(auprc(rng.random(10_000), y) - y.mean()) < 0.05

    def test_tie_group_is_one_threshold(self):
        # one tied group holding 1 positive and 1 negative: P = 1/2 at R = 1
        assert auprc([0.5, 0.5], [1, 0]) == 0.5

    def test_curve_points(self):
        thr, p, r = precision_recall_points([0.9, 0.5, 0.5, 0.1], [1, 0, 1, 0])
        np.testing.assert_array_equal(thr, [0.9, 0.5, 0.1])
        np.testing.assert_allclose(p, [1.0, 2 / 3, 0.5])
        np.testing.assert_allclose(r, [0.5, 1.0, 1.0])

    @pytest.mark.parametrize("n", range(1, 7))
    def test_one_iff_strict_separation(self, n):
        scores = [0.1, 0.3, 0.3, 0.5, 0.7, 0.9][:n]
        for labels in itertools.product((0, 1), repeat=n):
            if sum(labels) == 0:
                continue
            pos = [s for s, y in zip(scores, labels) if y]
            neg = [s for s, y in zip(scores, labels) if not y]
            separated = not neg or min(pos) > max(neg)
            assert (auprc(scores, labels) == 1.0) == separated


class TestBruteForceOracles:
    VALUES = (0.0, 0.25, 0.5, 1.0)

    @pytest.mark.parametrize("n", range(2, 9))
    def test_exhaustive_small_configurations(self, n):
        rng = np.random.default_rng(n)
        # every labeling, with score vectors drawn from a tiny value set so ties are common
        for labels in itertools.product((0, 1), repeat=n):
            for _ in range(4 if n > 6 else 12):
                scores = list(rng.choice(self.VALUES, size=n))
                if sum(labels):
                    assert abs(auprc(scores, labels) - brute_auprc(scores, list(labels))) <= 1e-12
                if 0 < sum(labels) < n:
                    assert auroc(scores, labels) == brute_auroc(scores, labels)


class TestAggregate:
    def test_single_run(self):
        rep = aggregate([{"auroc": 0.7, "auprc": 0.4}], 0.2)
        assert (rep.auroc_mean, rep.auroc_sd, rep.auprc_mean, rep.auprc_sd, rep.runs) == (0.7, 0.0, 0.4, 0.0, 1)

    def test_two_runs(self):
        rep = aggregate([{"auroc": 0.8, "auprc": 0.5}, {"auroc": 0.9, "auprc": 0.7}])
        assert rep.auroc_mean == pytest.approx(0.85, abs=1e-15)
        assert rep.auroc_sd == pytest.approx(np.std([0.8, 0.9], ddof=1), abs=1e-15)

    def test_permutation_invariant(self):
        runs = [{"run": i, "auroc": a, "auprc": p}
                for i, (a, p) in enumerate(np.random.default_rng(0).random((7, 2)).tolist())]
        ref = aggregate(runs, 0.3).to_json()
        for perm in itertools.islice(itertools.permutations(runs), 50):
            assert aggregate(list(perm), 0.3).to_json() == ref

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate([])

    def test_json_fields_and_round_trip(self):
        rep = aggregate([{"run": 0, "auroc": 0.6, "auprc": 0.3}], 0.25)
        doc = json.loads(rep.to_json())
        assert set(doc) == {"auroc_mean", "auroc_sd", "auprc_mean", "auprc_sd", "runs", "prevalence", "per_run"}
        assert EvalReport.from_json(rep.to_json()) == rep
