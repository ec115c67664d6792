import math

import numpy as np
import pytest

from uncq import measures
from uncq.bernoulli import DeltaMixture, epkl_decomposition, mi_decomposition, rmi
from uncq.errors import ConfigurationError, DimensionMismatchError
from uncq.estimator import (
    MEASURE_COLUMNS,
    EnsembleBatch,
    UncertaintyScores,
    clamp,
    convergence_report,
    score_batch,
)
from uncq.synthetic import generate_synthetic


def make_batch(rng, n=6, s=4, k=3, min_prob=0.0):
    probs = rng.dirichlet(np.ones(k), size=(n, s))
    if min_prob > 0.0:
        probs = np.maximum(probs, min_prob)
        probs = probs / probs.sum(axis=-1, keepdims=True)
    return EnsembleBatch(probs)


class TestEnsembleBatch:
    def test_shape_validation(self):
        with pytest.raises(ConfigurationError):
            EnsembleBatch(np.ones((2, 3)))

    def test_row_sum_validation(self):
        bad = np.full((1, 1, 2), 0.6)
        with pytest.raises(ConfigurationError):
            EnsembleBatch(bad)

    def test_duplicate_ids_rejected(self, rng):
        probs = rng.dirichlet(np.ones(3), size=(2, 2))
        with pytest.raises(ConfigurationError):
            EnsembleBatch(probs, ids=["a", "a"])

    def test_weights_length_checked(self, rng):
        probs = rng.dirichlet(np.ones(3), size=(2, 2))
        with pytest.raises(DimensionMismatchError):
            EnsembleBatch(probs, weights=[1.0])


class TestClamp:
    def test_zero_epsilon_is_identity(self, rng):
        batch = make_batch(rng)
        assert clamp(batch, 0.0) is batch

    def test_floor_and_renormalize(self):
        batch = EnsembleBatch(np.array([[[1.0, 0.0]]]))
        clamped = clamp(batch, 1e-6)
        row = clamped.probs[0, 0]
        assert row.sum() == pytest.approx(1.0, abs=1e-12)
        assert row[1] == pytest.approx(1e-6, rel=1e-3)

    def test_epsilon_bound(self, rng):
        with pytest.raises(ConfigurationError):
            clamp(make_batch(rng, k=4), 0.25)

    def test_clamping_makes_pairwise_kl_finite(self):
        batch = EnsembleBatch(np.array([[[1.0, 0.0], [0.0, 1.0]]]))
        assert score_batch(batch).column("epkl_epistemic")[0] == math.inf
        clamped = score_batch(clamp(batch, 1e-6))
        assert math.isfinite(clamped.column("epkl_epistemic")[0])


class TestScoreBatch:
    def test_degenerate_row(self):
        probs = np.tile([0.3, 0.7], (1, 5, 1))
        table = score_batch(EnsembleBatch(probs))
        h = measures.entropy(measures.bma(EnsembleBatch(probs).ensemble(0)))
        row = table.row(0)
        assert row["mi_total"] == pytest.approx(h, abs=1e-12)
        assert row["aleatoric"] == pytest.approx(h, abs=1e-12)
        for name in ("mi_epistemic", "epkl_epistemic", "rmi"):
            assert row[name] == pytest.approx(0.0, abs=1e-12)

    def test_row_wise_gap_identity(self, rng):
        table = score_batch(make_batch(rng, n=20, min_prob=1e-4))
        gap = table.column("epkl_epistemic") - (
            table.column("mi_epistemic") + table.column("rmi"))
        assert np.all(np.abs(gap) <= 1e-9)

    def test_matches_bernoulli_lab(self):
        post = DeltaMixture((0.2, 0.9), (0.5, 0.5))
        probs = np.array([[[t, 1.0 - t] for t in post.locations]])
        row = score_batch(EnsembleBatch(probs)).row(0)
        assert row["aleatoric"] == pytest.approx(
            mi_decomposition(post).aleatoric, abs=1e-9)
        assert row["mi_epistemic"] == pytest.approx(
            mi_decomposition(post).epistemic, abs=1e-9)
        assert row["epkl_epistemic"] == pytest.approx(
            epkl_decomposition(post).epistemic, abs=1e-9)
        assert row["rmi"] == pytest.approx(rmi(post), abs=1e-9)

    def test_permutation_equivariance(self, rng):
        batch = make_batch(rng, n=10)
        table = score_batch(batch)
        perm = rng.permutation(10)
        permuted = EnsembleBatch(
            batch.probs[perm], None, [batch.ids[i] for i in perm])
        permuted_table = score_batch(permuted)
        for name in MEASURE_COLUMNS:
            assert np.array_equal(
                table.column(name)[perm], permuted_table.column(name))

    def test_concurrent_equals_serial(self, rng):
        batch = make_batch(rng, n=32)
        serial = score_batch(batch)
        threaded = score_batch(batch, max_workers=4)
        for name in MEASURE_COLUMNS:
            assert np.array_equal(serial.column(name), threaded.column(name))

    def test_prediction_tie_breaks_low_index(self):
        probs = np.array([[[0.5, 0.5]]])
        table = score_batch(EnsembleBatch(probs))
        assert table.predictions[0] == 0


class TestConvergenceReport:
    def test_full_size_has_zero_dispersion(self, rng):
        probs = rng.dirichlet(np.ones(3), size=16)
        report = convergence_report(probs, [16], seed=1)
        for _, (mean, std) in report[16].items():
            assert std == 0.0
            assert math.isfinite(mean)

    def test_degenerate_row_has_zero_epistemic(self):
        probs = np.tile([0.4, 0.6], (32, 1))
        report = convergence_report(probs, [4, 16], seed=1)
        for size in (4, 16):
            for name in ("mi_epistemic", "epkl_epistemic", "rmi"):
                mean, std = report[size][name]
                assert mean == pytest.approx(0.0, abs=1e-12)
                assert std == pytest.approx(0.0, abs=1e-12)

    def test_dispersion_shrinks_with_subset_size(self):
        batch, _ = generate_synthetic(11, 1, 512, 4, disagreement=0.8)
        report = convergence_report(
            batch.probs[0], [8, 32, 128], seed=5, num_resamples=24)
        for name in ("epkl_epistemic", "mi_epistemic"):
            stds = [report[s][name][1] for s in (8, 32, 128)]
            assert stds[0] / stds[1] >= 2.0 / 1.5
            assert stds[1] / stds[2] >= 2.0 / 1.5

    def test_oversized_subset_rejected(self, rng):
        probs = rng.dirichlet(np.ones(3), size=8)
        with pytest.raises(ConfigurationError):
            convergence_report(probs, [9], seed=0)


class TestSklearnAdapter:
    def test_transform_shape_and_columns(self, rng):
        X = rng.dirichlet(np.ones(3), size=(5, 4))
        scorer = UncertaintyScores()
        out = scorer.fit_transform(X)
        assert out.shape == (5, len(MEASURE_COLUMNS))
        assert list(scorer.get_feature_names_out()) == list(MEASURE_COLUMNS)

    def test_get_params_roundtrip(self):
        scorer = UncertaintyScores(epsilon=1e-9)
        params = scorer.get_params()
        assert params["epsilon"] == 1e-9
        clone = UncertaintyScores(**params)
        assert clone.get_params() == params
