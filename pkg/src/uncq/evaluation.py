"""Detection and selective-prediction evaluation of uncertainty scores.

AUROC uses the midrank (Mann-Whitney) convention: ties count half, and +inf
scores form a single topmost tie class, which keeps the statistic invariant
under strictly increasing score transforms. Selective prediction integrates
the accuracy-vs-coverage curve by trapezoid over every integer coverage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import ConfigurationError, IdentifierMismatchError
from .estimator import EnsembleBatch, MeasureTable, score_batch

DETECTION_COMPONENTS = (
    "mi_total",
    "epkl_total",
    "aleatoric",
    "mi_epistemic",
    "epkl_epistemic",
)


@dataclass(frozen=True)
class ScoredRecord:
    identifier: str
    score: float
    positive: bool


@dataclass(frozen=True)
class ScoredSet:
    """Binary-labeled scores; positives are the anomalies to be detected."""

    records: tuple

    def __init__(self, records: Sequence[ScoredRecord]):
        recs = tuple(records)
        labels = [r.positive for r in recs]
        if not any(labels) or all(labels):
            raise ConfigurationError("need at least one positive and one negative")
        if any(math.isnan(r.score) for r in recs):
            raise ConfigurationError("scores must not be NaN")
        object.__setattr__(self, "records", recs)


@dataclass(frozen=True)
class SelectiveRecord:
    identifier: str
    uncertainty: float
    correct: bool


@dataclass(frozen=True)
class SelectiveSet:
    records: tuple

    def __init__(self, records: Sequence[SelectiveRecord]):
        recs = tuple(records)
        if not recs:
            raise ConfigurationError("selective set must be non-empty")
        object.__setattr__(self, "records", recs)


@dataclass(frozen=True)
class ComponentResult:
    """Per-split values for one measure component, with their mean and
    sample standard deviation."""

    component: str
    split_values: tuple
    mean: float
    std: float


@dataclass(frozen=True)
class DetectionReport:
    task: str
    seed: int
    results: dict

    def component(self, name: str) -> ComponentResult:
        return self.results[name]


def auroc(scored: ScoredSet) -> float:
    """Probability that a random positive outscores a random negative,
    ties counted half."""
    scores = np.array([r.score for r in scored.records])
    positive = np.array([r.positive for r in scored.records])
    ranks = rankdata(scores)  # midranks; inf values tie at the top
    n_pos = int(positive.sum())
    n_neg = len(scores) - n_pos
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def selective_prediction_auc(selective: SelectiveSet) -> float:
    """Area under accuracy vs. fraction of most certain samples.

    Samples are taken in ascending uncertainty (stable, identifier
    tie-break); accuracy among the m most certain is evaluated at every
    m = 1..n and integrated by trapezoid over coverage m/n, normalized to
    the covered range so that an always-correct set scores exactly 1.
    """
    recs = sorted(selective.records, key=lambda r: (r.uncertainty, r.identifier))
    n = len(recs)
    correct = np.cumsum([1.0 if r.correct else 0.0 for r in recs])
    coverage = np.arange(1, n + 1) / n
    accuracy = correct / np.arange(1, n + 1)
    if n == 1:
        return float(accuracy[0])
    area = np.trapezoid(accuracy, coverage)
    return float(area / (coverage[-1] - coverage[0]))


def misclassification_labels(
    table: MeasureTable,
    truth: Sequence[int],
    component: str = "epkl_total",
) -> tuple[ScoredSet, SelectiveSet]:
    """Label each input correct/incorrect from the mixture argmax.

    Returns the ScoredSet (misclassified = positive) and SelectiveSet for
    the chosen measure component.
    """
    if component not in table.values:
        raise ConfigurationError(f"unknown measure component {component!r}")
    truth_arr = np.asarray(truth, dtype=np.int64)
    if truth_arr.shape != (len(table.ids),):
        raise IdentifierMismatchError("truth labels must align with table rows")
    preds = table.predictions
    scores = table.column(component)
    scored = []
    selective = []
    for i, identifier in enumerate(table.ids):
        correct = bool(preds[i] == truth_arr[i])
        scored.append(ScoredRecord(identifier, float(scores[i]), not correct))
        selective.append(SelectiveRecord(identifier, float(scores[i]), correct))
    return ScoredSet(scored), SelectiveSet(selective)


@dataclass(frozen=True)
class SplitSpec:
    """Reproducible split plan: all anomalous records appear in every split;
    in-distribution records are partitioned into disjoint seeded subsets."""

    num_splits: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.num_splits < 1:
            raise ConfigurationError("need at least one split")

    def in_dist_splits(self, n: int) -> list:
        per_split = n // self.num_splits
        if per_split < 1:
            raise ConfigurationError(
                f"cannot cut {n} in-distribution inputs into {self.num_splits} splits"
            )
        rng = np.random.Generator(np.random.Philox(self.seed))
        order = rng.permutation(n)
        return [
            np.sort(order[i * per_split : (i + 1) * per_split])
            for i in range(self.num_splits)
        ]


def run_detection(
    in_dist: EnsembleBatch,
    anomalous: EnsembleBatch,
    splits: SplitSpec,
    task: str = "detection",
) -> DetectionReport:
    """AUROC of each measure component at separating anomalous from
    in-distribution inputs, reported as mean +/- sample std over splits."""
    if in_dist.num_classes != anomalous.num_classes:
        raise ConfigurationError("class counts differ between batches")
    in_table = score_batch(in_dist)
    anom_table = score_batch(anomalous)
    id_splits = splits.in_dist_splits(in_dist.num_inputs)

    results = {}
    for component in DETECTION_COMPONENTS:
        in_scores = in_table.column(component)
        anom_scores = anom_table.column(component)
        values = []
        for subset in id_splits:
            records = [
                ScoredRecord(f"anom:{anomalous.ids[i]}", float(anom_scores[i]), True)
                for i in range(anomalous.num_inputs)
            ]
            records += [
                ScoredRecord(f"in:{in_dist.ids[i]}", float(in_scores[i]), False)
                for i in subset
            ]
            values.append(auroc(ScoredSet(records)))
        arr = np.array(values)
        std = float(np.std(arr, ddof=1)) if len(arr) > 1 else 0.0
        results[component] = ComponentResult(
            component, tuple(float(v) for v in values), float(arr.mean()), std
        )
    return DetectionReport(task, splits.seed, results)
