"""Batched scoring of per-input posterior ensembles.

An EnsembleBatch holds N inputs x S posterior samples x K classes. Scoring
computes, per input, all seven scalar measures plus the mixture argmax used
downstream for misclassification labeling. Rows are independent; the optional
thread pool writes results by row index, so concurrent and serial runs produce
identical tables.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ConfigurationError, DimensionMismatchError
from .measures import (
    expected_entropy,
    expected_pairwise_kl,
    mutual_information,
    reverse_mutual_information,
    _bma_raw,
)
from .types import PosteriorEnsemble

ROW_SUM_TOL = 1e-6
ROW_SUM_SKIP = 1e-12

MEASURE_COLUMNS = (
    "mi_total",
    "epkl_total",
    "aleatoric",
    "mi_epistemic",
    "epkl_epistemic",
    "rmi",
    "bma_entropy",
)


def normalize_rows(probs: np.ndarray, tol: float = ROW_SUM_TOL) -> np.ndarray:
    """Validate row sums within ``tol`` and renormalize the off rows.

    Rows already within 1e-12 of one are left untouched so that well-formed
    data survives load/store cycles bit-identically.
    """
    sums = probs.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > tol):
        raise ConfigurationError(f"probability rows must sum to 1 within {tol}")
    off = np.abs(sums - 1.0) > ROW_SUM_SKIP
    if np.any(off):
        probs = probs.copy()
        probs[off] = probs[off] / sums[off][..., None]
    return probs


@dataclass(frozen=True)
class EnsembleBatch:
    """N per-input posterior ensembles sharing one set of sample weights."""

    probs: np.ndarray
    weights: np.ndarray | None
    ids: tuple

    def __init__(
        self,
        probs: np.ndarray,
        weights: Sequence[float] | np.ndarray | None = None,
        ids: Sequence[str] | None = None,
    ):
        arr = np.asarray(probs, dtype=np.float64)
        if arr.ndim != 3:
            raise ConfigurationError("probs must have shape (N, S, K)")
        n, s, k = arr.shape
        if n < 1 or s < 1 or k < 1:
            raise ConfigurationError("N, S and K must all be >= 1")
        if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
            raise ConfigurationError("probabilities must be finite and non-negative")
        arr = normalize_rows(arr)
        w = None
        if weights is not None:
            w = np.asarray(weights, dtype=np.float64)
            if w.shape != (s,):
                raise DimensionMismatchError("weights length must match S")
            w.flags.writeable = False
        if ids is None:
            id_tuple = tuple(str(i) for i in range(n))
        else:
            id_tuple = tuple(str(i) for i in ids)
            if len(id_tuple) != n:
                raise DimensionMismatchError("ids length must match N")
            if len(set(id_tuple)) != n:
                raise ConfigurationError("ids must be unique")
        arr.flags.writeable = False
        object.__setattr__(self, "probs", arr)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "ids", id_tuple)

    @property
    def num_inputs(self) -> int:
        return int(self.probs.shape[0])

    @property
    def num_samples(self) -> int:
        return int(self.probs.shape[1])

    @property
    def num_classes(self) -> int:
        return int(self.probs.shape[2])

    def ensemble(self, n: int) -> PosteriorEnsemble:
        return PosteriorEnsemble(self.probs[n], self.weights)


@dataclass(frozen=True)
class MeasureTable:
    """Per-input measure values, aligned with the batch's input order."""

    ids: tuple
    values: dict
    bma: np.ndarray

    @property
    def predictions(self) -> np.ndarray:
        """Mixture argmax per input; ties resolve to the lowest class index."""
        return np.argmax(self.bma, axis=1)

    def column(self, name: str) -> np.ndarray:
        return self.values[name]

    def row(self, n: int) -> dict:
        return {name: float(self.values[name][n]) for name in MEASURE_COLUMNS}


def clamp(batch: EnsembleBatch, epsilon: float) -> EnsembleBatch:
    """Floor all probabilities at ``epsilon``, then renormalize each row.

    ``epsilon = 0`` is the identity. Clamping turns genuinely infinite
    pairwise-KL values into large finite ones; it is opt-in for exactly that
    reason.
    """
    if epsilon < 0.0:
        raise ConfigurationError("epsilon must be >= 0")
    if epsilon >= 1.0 / batch.num_classes:
        raise ConfigurationError(
            f"epsilon must be < 1/K = {1.0 / batch.num_classes!r}"
        )
    if epsilon == 0.0:
        return batch
    probs = np.maximum(batch.probs, epsilon)
    probs = probs / probs.sum(axis=-1, keepdims=True)
    return EnsembleBatch(probs, batch.weights, batch.ids)


def _score_row(ens: PosteriorEnsemble) -> tuple:
    au = expected_entropy(ens)
    mi = mutual_information(ens)
    epkl = expected_pairwise_kl(ens)
    rmi = reverse_mutual_information(ens)
    mixed = _bma_raw(ens)
    h_bma = math.fsum(-x * math.log(x) for x in mixed.tolist() if x > 0.0)
    return (au + mi, au + epkl, au, mi, epkl, rmi, max(h_bma, 0.0), mixed)


def score_batch(batch: EnsembleBatch, max_workers: int | None = None) -> MeasureTable:
    """Score every input; output row order always matches input order."""
    n = batch.num_inputs
    rows = [None] * n

    def work(i: int) -> None:
        rows[i] = _score_row(batch.ensemble(i))

    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            list(pool.map(work, range(n)))
    else:
        for i in range(n):
            work(i)

    values = {
        name: np.array([rows[i][j] for i in range(n)])
        for j, name in enumerate(MEASURE_COLUMNS)
    }
    mixed = np.stack([rows[i][7] for i in range(n)])
    return MeasureTable(batch.ids, values, mixed)


def convergence_report(
    row_probs: np.ndarray,
    subset_sizes: Sequence[int],
    seed: int,
    num_resamples: int = 16,
) -> dict:
    """Mean and dispersion of each measure over seeded posterior subsamples.

    For each requested size S', draws ``num_resamples`` subsets of the S
    samples without replacement and rescoring with uniform weights. At
    S' = S there is a single possible subset, so the dispersion is zero.
    Returns {size: {measure: (mean, std)}} with sample standard deviations.
    """
    probs = np.asarray(row_probs, dtype=np.float64)
    if probs.ndim != 2:
        raise ConfigurationError("row must have shape (S, K)")
    s = probs.shape[0]
    if num_resamples < 2:
        raise ConfigurationError("need at least 2 resamples per size")
    for size in subset_sizes:
        if not 1 <= size <= s:
            raise ConfigurationError(f"subset size {size} exceeds S = {s}")

    rng = np.random.Generator(np.random.Philox(seed))
    out: dict = {}
    for size in subset_sizes:
        draws = []
        repeats = 1 if size == s else num_resamples
        for _ in range(repeats):
            idx = np.sort(rng.choice(s, size=size, replace=False))
            ens = PosteriorEnsemble(probs[idx])
            au = expected_entropy(ens)
            mi = mutual_information(ens)
            epkl = expected_pairwise_kl(ens)
            rmi = reverse_mutual_information(ens)
            draws.append((au + mi, au + epkl, au, mi, epkl, rmi))
        stack = np.array(draws)
        stats = {}
        for j, name in enumerate(MEASURE_COLUMNS[:6]):
            col = stack[:, j]
            std = float(np.std(col, ddof=1)) if len(col) > 1 else 0.0
            stats[name] = (float(np.mean(col)), std)
        out[size] = stats
    return out


class UncertaintyScores(TransformerMixin, BaseEstimator):
    """Stateless sklearn-style transformer over (N, S, K) probability arrays.

    ``transform`` returns an (N, 7) array with columns ``MEASURE_COLUMNS``,
    so ensemble predictions can feed standard pipelines. Infinite pairwise-KL
    values pass through as ``np.inf`` unless an ``epsilon`` floor is set.
    """

    def __init__(self, epsilon: float = 0.0, weights=None):
        self.epsilon = epsilon
        self.weights = weights

    def fit(self, X, y=None):
        np.asarray(X)
        return self

    def transform(self, X) -> np.ndarray:
        batch = EnsembleBatch(np.asarray(X, dtype=np.float64), self.weights)
        table = score_batch(clamp(batch, self.epsilon))
        return np.column_stack([table.column(c) for c in MEASURE_COLUMNS])

    def get_feature_names_out(self, input_features=None):
        return np.asarray(MEASURE_COLUMNS, dtype=object)
