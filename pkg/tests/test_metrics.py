import math

import numpy as np
import pytest

from afcf.exceptions import MetricError
from afcf.services import metrics
from afcf.services.anchor_clustering import labeling_from_labels

LABELS = np.array([0, 0, 0, 0, 1, 1, 1, 1])
GROUPS = np.array([0, 0, 0, 1, 0, 1, 1, 1])


class TestBalance:
    def test_worked_example(self):
        # cluster 0 holds 3:1, cluster 1 holds 1:3
        assert metrics.balance(LABELS, GROUPS, 2, 2) == pytest.approx(1 / 3, abs=0)

    def test_perfect(self):
        assert metrics.balance([0, 0, 1, 1], [0, 1, 0, 1], 2, 2) == 1.0

    def test_cluster_missing_a_group(self):
        assert metrics.balance([0, 0, 1, 1], [0, 0, 0, 1], 2, 2) == 0.0

    def test_single_group(self):
        assert metrics.balance([0, 1, 1], [0, 0, 0], 2, 1) == 1.0

    def test_three_groups_uses_extreme_pair(self):
        labels = np.zeros(7, dtype=int)
        groups = np.array([0, 0, 0, 0, 1, 1, 2])
        assert metrics.balance(labels, groups, 1, 3) == pytest.approx(0.25)

    def test_empty_cluster_excluded(self, caplog):
        assert metrics.balance([0, 0, 0, 0], [0, 1, 0, 1], 3, 2) == 1.0
        assert "empty" in caplog.text

    def test_invariant_under_cluster_and_group_relabeling(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            k, t = int(rng.integers(1, 5)), int(rng.integers(2, 4))
            n = int(rng.integers(2, 40))
            labels = rng.integers(0, k, n)
            groups = rng.integers(0, t, n)
            base = metrics.balance(labels, groups, k, t)
            perm_k, perm_t = rng.permutation(k), rng.permutation(t)
            assert metrics.balance(perm_k[labels], perm_t[groups], k, t) == base
            order = rng.permutation(n)
            assert metrics.balance(labels[order], groups[order], k, t) == base
            assert 0.0 <= base <= 1.0


class TestProportions:
    def test_rows(self):
        props = metrics.per_cluster_proportions(LABELS, GROUPS, 3, 2)
        np.testing.assert_allclose(props, [[0.75, 0.25], [0.25, 0.75], [0.0, 0.0]])


class TestMnce:
    def test_worked_example(self):
        h = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25))
        assert metrics.mnce(LABELS, GROUPS, 2, 2) == pytest.approx(h / math.log(2), abs=1e-9)

    def test_balanced_is_one(self):
        assert metrics.mnce([0, 0, 1, 1], [0, 1, 0, 1], 2, 2) == pytest.approx(1.0, abs=1e-12)

    def test_single_group_undefined(self):
        with pytest.raises(MetricError):
            metrics.mnce([0, 1], [0, 0], 2, 1)

    def test_invariant_under_relabeling(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            k = int(rng.integers(1, 5))
            n = int(rng.integers(4, 40))
            labels = rng.integers(0, k, n)
            groups = np.concatenate([[0, 1], rng.integers(0, 2, n - 2)])
            base = metrics.mnce(labels, groups, k, 2)
            perm = rng.permutation(k)
            assert metrics.mnce(perm[labels], groups, k, 2) == pytest.approx(base, abs=1e-12)
            assert metrics.mnce(labels, 1 - groups, k, 2) == pytest.approx(base, abs=1e-12)


class TestAccNmi:
    def test_acc_worked_examples(self):
        assert metrics.acc([0, 0, 1, 1, 1], [1, 1, 0, 0, 0]) == 1.0
        assert metrics.acc([0, 0, 0, 1], [0, 0, 1, 1]) == 0.75

    def test_acc_more_clusters_than_classes(self):
        assert metrics.acc([0, 1, 2, 2], [0, 0, 1, 1]) == 0.75

    def test_nmi_identical_partitions(self):
        assert metrics.nmi([2, 2, 0, 0, 1], [0, 0, 1, 1, 2]) == pytest.approx(1.0, abs=1e-9)

    def test_nmi_independent(self):
        assert metrics.nmi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-9)

    def test_nmi_single_cluster(self):
        assert metrics.nmi([0, 0, 0], [0, 1, 0]) == 0.0

    def test_permutation_invariance(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            k = int(rng.integers(2, 5))
            n = int(rng.integers(4, 30))
            pred = rng.integers(0, k, n)
            truth = rng.integers(0, k, n)
            perm = rng.permutation(k)
            assert metrics.acc(perm[pred], truth) == metrics.acc(pred, truth)
            assert metrics.nmi(perm[pred], truth) == pytest.approx(metrics.nmi(pred, truth), abs=1e-12)
            assert metrics.acc(truth, truth) == 1.0


class TestSoftBalance:
    def test_one_hot_graph_matches_hard_balance(self):
        labeling = labeling_from_labels([0, 1, 0, 1], [0, 0, 1, 1], 2)
        rng = np.random.default_rng(3)
        choice = rng.permutation(np.arange(12) % 4)
        Z = np.zeros((4, 12))
        Z[choice, np.arange(12)] = 1.0
        groups = np.array([0, 1] * 6)
        hard = labeling.labels[choice]
        assert metrics.soft_balance(Z, labeling, groups, 2) == pytest.approx(
            metrics.balance(hard, groups, 2, 2)
        )

    def test_zero_mass_cluster(self):
        labeling = labeling_from_labels([0, 1], [0, 1], 2)
        Z = np.array([[1.0, 1.0], [0.0, 0.0]])
        with pytest.raises(MetricError) as err:
            metrics.soft_balance(Z, labeling, [0, 1], 2)
        assert err.value.details == {"cluster": 1}

    def test_uniform_graph(self):
        labeling = labeling_from_labels([0, 1, 0, 1], [0, 1, 0, 1], 2)
        Z = np.full((4, 6), 0.25)
        assert metrics.soft_balance(Z, labeling, [0, 0, 0, 1, 1, 1]) == pytest.approx(1.0)


class TestEvaluate:
    def test_without_truth(self):
        bundle = metrics.evaluate(LABELS, GROUPS, 2, 2)
        assert bundle.acc is None and bundle.nmi is None
        assert bundle.balance == pytest.approx(1 / 3)
        assert bundle.mnce is not None
        assert "acc" not in bundle.as_flat()

    def test_with_graph_reports_gap(self):
        labeling = labeling_from_labels([0, 1, 0, 1], [0, 0, 1, 1], 2)
        Z = np.full((4, 8), 0.25)
        bundle = metrics.evaluate(
            LABELS, GROUPS, 2, 2, truth=LABELS, Z=Z, labeling=labeling, target_balance=1.0
        )
        assert bundle.acc == 1.0
        assert bundle.soft_balance == pytest.approx(1.0)
        assert bundle.anchor_balance == 1.0
        assert bundle.balance_gap == pytest.approx(1.0 - 1 / 3)
        assert bundle.target_balance == 1.0
        assert bundle.anchor_target_gap == pytest.approx(0.0)

    def test_anchor_target_gap(self):
        labeling = labeling_from_labels([0, 1, 0, 1], [0, 0, 1, 1], 2)
        Z = np.full((4, 8), 0.25)
        bundle = metrics.evaluate(LABELS, GROUPS, 2, 2, Z=Z, labeling=labeling, target_balance=0.8)
        assert bundle.anchor_target_gap == pytest.approx(0.2)
        assert bundle.as_flat()["anchor_target_gap"] == pytest.approx(0.2)
        assert metrics.evaluate(LABELS, GROUPS, 2, 2, Z=Z, labeling=labeling).anchor_target_gap is None

    def test_empty_clusters_listed(self):
        bundle = metrics.evaluate([0, 0, 2, 2], [0, 1, 0, 1], 3, 2)
        assert bundle.empty_clusters == [1]
