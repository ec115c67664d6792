import math

import numpy as np
import pytest

from uncq.errors import ConfigurationError, IdentifierMismatchError
from uncq.estimator import EnsembleBatch, score_batch
from uncq.evaluation import (
    DETECTION_COMPONENTS,
    ScoredRecord,
    ScoredSet,
    SelectiveRecord,
    SelectiveSet,
    SplitSpec,
    auroc,
    misclassification_labels,
    run_detection,
    selective_prediction_auc,
)
from uncq.synthetic import generate_synthetic


def auroc_oracle(records):
    """O(n^2) pairwise count: wins + half ties over all (positive, negative)."""
    pos = [r.score for r in records if r.positive]
    neg = [r.score for r in records if not r.positive]
    total = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                total += 1.0
            elif p == n:
                total += 0.5
    return total / (len(pos) * len(neg))


def selective_oracle(records):
    """Direct recomputation of the accuracy-coverage curve and its area."""
    recs = sorted(records, key=lambda r: (r.uncertainty, r.identifier))
    n = len(recs)
    points = []
    hits = 0
    for m, r in enumerate(recs, start=1):
        hits += 1 if r.correct else 0
        points.append((m / n, hits / m))
    if n == 1:
        return points[0][1]
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += 0.5 * (y0 + y1) * (x1 - x0)
    return area / (points[-1][0] - points[0][0])


def random_scored_set(rng, n=None, with_ties=False, with_inf=False):
    n = n or int(rng.integers(4, 201))
    scores = rng.normal(size=n)
    if with_ties:
        scores = np.round(scores, 1)
    if with_inf:
        scores[rng.random(n) < 0.1] = math.inf
    labels = np.zeros(n, dtype=bool)
    labels[rng.choice(n, size=int(rng.integers(1, n)), replace=False)] = True
    return ScoredSet([
        ScoredRecord(f"r{i}", float(scores[i]), bool(labels[i])) for i in range(n)
    ])


class TestAuroc:
    def test_perfect_separation(self):
        records = [ScoredRecord("a", 0.1, False), ScoredRecord("b", 0.2, False),
                   ScoredRecord("c", 0.3, True), ScoredRecord("d", 0.4, True)]
        assert auroc(ScoredSet(records)) == 1.0

    def test_pure_ties(self):
        records = [ScoredRecord(str(i), 1.0, i % 2 == 0) for i in range(10)]
        assert auroc(ScoredSet(records)) == 0.5

    def test_single_class_rejected(self):
        with pytest.raises(ConfigurationError):
            ScoredSet([ScoredRecord("a", 1.0, True)])

    def test_matches_pairwise_oracle(self, rng):
        for i in range(60):
            scored = random_scored_set(
                rng, with_ties=bool(i % 2), with_inf=bool(i % 3 == 0))
            assert auroc(scored) == pytest.approx(
                auroc_oracle(scored.records), abs=1e-12)

    def test_invariant_under_increasing_transforms(self, rng):
        scored = random_scored_set(rng, with_ties=True, with_inf=True)
        base = auroc(scored)
        for fn in (math.exp, lambda x: 3.0 * x + 7.0):
            mapped = ScoredSet([
                ScoredRecord(r.identifier, fn(r.score), r.positive)
                for r in scored.records
            ])
            assert auroc(mapped) == pytest.approx(base, abs=1e-12)

    def test_label_swap_complement(self, rng):
        scored = random_scored_set(rng)
        swapped = ScoredSet([
            ScoredRecord(r.identifier, r.score, not r.positive)
            for r in scored.records
        ])
        assert auroc(swapped) == pytest.approx(1.0 - auroc(scored), abs=1e-12)


class TestSelectivePrediction:
    def test_all_correct(self):
        recs = [SelectiveRecord(str(i), float(i), True) for i in range(10)]
        assert selective_prediction_auc(SelectiveSet(recs)) == 1.0

    def test_all_incorrect(self):
        recs = [SelectiveRecord(str(i), float(i), False) for i in range(10)]
        assert selective_prediction_auc(SelectiveSet(recs)) == 0.0

    def test_matches_curve_oracle(self, rng):
        for _ in range(40):
            n = int(rng.integers(2, 51))
            recs = [
                SelectiveRecord(f"r{i}", float(np.round(rng.normal(), 1)),
                                bool(rng.random() < 0.7))
                for i in range(n)
            ]
            selective = SelectiveSet(recs)
            assert selective_prediction_auc(selective) == pytest.approx(
                selective_oracle(recs), abs=1e-12)

    def test_invariant_under_increasing_transform(self, rng):
        recs = [SelectiveRecord(f"r{i}", float(rng.normal()),
                                bool(rng.random() < 0.6)) for i in range(30)]
        base = selective_prediction_auc(SelectiveSet(recs))
        mapped = SelectiveSet([
            SelectiveRecord(r.identifier, math.exp(r.uncertainty), r.correct)
            for r in recs
        ])
        assert selective_prediction_auc(mapped) == pytest.approx(base, abs=1e-12)


class TestMisclassificationLabels:
    def test_correct_and_incorrect(self):
        probs = np.array([
            [[0.9, 0.1]],
            [[0.5, 0.5]],
        ])
        table = score_batch(EnsembleBatch(probs))
        scored, selective = misclassification_labels(table, [0, 1])
        # row 0 predicted 0 and true: negative; row 1 ties to class 0, truth 1.
        by_id = {r.identifier: r for r in scored.records}
        assert not by_id["0"].positive
        assert by_id["1"].positive
        sel = {r.identifier: r for r in selective.records}
        assert sel["0"].correct and not sel["1"].correct

    def test_accuracy_matches_argmax_oracle(self, rng):
        batch, truth = generate_synthetic(3, 50, 8, 4, disagreement=0.4)
        table = score_batch(batch)
        _, selective = misclassification_labels(table, truth)
        acc = np.mean([r.correct for r in selective.records])
        oracle = np.mean(np.argmax(table.bma, axis=1) == np.asarray(truth))
        assert acc == pytest.approx(oracle)

    def test_truth_length_mismatch(self, rng):
        batch, truth = generate_synthetic(3, 5, 4, 3)
        with pytest.raises(IdentifierMismatchError):
            misclassification_labels(score_batch(batch), truth[:-1])


class TestRunDetection:
    def test_identical_populations_near_half(self):
        batch, _ = generate_synthetic(21, 240, 8, 4, disagreement=0.5)
        other, _ = generate_synthetic(21, 240, 8, 4, disagreement=0.5)
        report = run_detection(batch, other, SplitSpec(3, seed=9))
        for name in DETECTION_COMPONENTS:
            assert abs(report.component(name).mean - 0.5) < 0.02

    def test_constructed_separation_maxes_epistemic(self):
        agreeing, _ = generate_synthetic(31, 120, 8, 4, disagreement=0.0)
        disagreeing, _ = generate_synthetic(32, 120, 8, 4, disagreement=2.0)
        report = run_detection(agreeing, disagreeing, SplitSpec(3, seed=1))
        for name in ("mi_epistemic", "epkl_epistemic"):
            assert report.component(name).mean == 1.0

    def test_std_is_sample_std_of_split_values(self):
        batch, _ = generate_synthetic(41, 90, 6, 3, disagreement=0.6)
        other, _ = generate_synthetic(42, 90, 6, 3, disagreement=0.6, shift=0.5)
        report = run_detection(batch, other, SplitSpec(3, seed=2))
        for name in DETECTION_COMPONENTS:
            comp = report.component(name)
            assert comp.std == pytest.approx(
                float(np.std(comp.split_values, ddof=1)), abs=1e-12)
            assert min(comp.split_values) <= comp.mean <= max(comp.split_values)

    def test_reproducible_from_seed(self):
        batch, _ = generate_synthetic(51, 60, 6, 3, disagreement=0.6)
        other, _ = generate_synthetic(52, 60, 6, 3, disagreement=0.9)
        a = run_detection(batch, other, SplitSpec(3, seed=7))
        b = run_detection(batch, other, SplitSpec(3, seed=7))
        for name in DETECTION_COMPONENTS:
            assert a.component(name).split_values == b.component(name).split_values

    def test_class_count_mismatch(self):
        a, _ = generate_synthetic(1, 10, 4, 3)
        b, _ = generate_synthetic(1, 10, 4, 4)
        with pytest.raises(ConfigurationError):
            run_detection(a, b, SplitSpec(2, seed=0))
