import io

import numpy as np
import pytest
from scipy.special import expit

from pccdesign.datagen import (
    Cohort,
    ModificationParams,
    SourceModel,
    compute_scores,
    generate_lda_cohort,
    generate_outcomes,
    load_cohort_csv,
    load_cohort_npz,
    save_cohort_csv,
    save_cohort_npz,
)


class TestComputeScores:
    def test_zero_feature_row_gives_intercept(self):
        source = SourceModel(-1.5, np.array([0.3, -0.2]))
        scores = compute_scores(np.zeros((1, 2)), source)
        assert scores[0] == -1.5

    def test_single_active_coefficient(self):
        source = SourceModel(0.0, np.array([0.7, 0.0, 0.0]))
        scores = compute_scores(np.eye(3)[:1], source)
        assert scores[0] == pytest.approx(0.7, abs=1e-15)

    def test_matches_manual_dot_product(self):
        # oracle: explicit per-element dot product
        rng = np.random.default_rng(3)
        X = rng.normal(size=(3, 2))
        source = SourceModel(0.25, rng.normal(size=2))
        expected = [
            0.25 + X[i, 0] * source.coefficients[0] + X[i, 1] * source.coefficients[1]
            for i in range(3)
        ]
        assert compute_scores(X, source) == pytest.approx(expected, abs=1e-14)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            compute_scores(np.zeros((2, 3)), SourceModel(0.0, np.zeros(2)))


class TestGenerateLdaCohort:
    def test_simulation_cohort_shape(self, preset_beta):
        cohort = generate_lda_cohort(1000, 100, 0.10, preset_beta, seed=0)
        assert cohort.features.shape == (1000, 100)
        assert cohort.scores.shape == (1000,)
        assert cohort.labels is None
        assert cohort.source.intercept == pytest.approx(np.log(0.1 / 0.9))

    def test_score_consistency_invariant(self, preset_beta):
        cohort = generate_lda_cohort(5000, 100, 0.10, preset_beta, seed=11)
        recomputed = cohort.source.intercept + cohort.features @ cohort.source.coefficients
        assert np.abs(cohort.scores - recomputed).max() < 1e-12

    def test_zero_coefficients_give_constant_scores(self):
        cohort = generate_lda_cohort(500, 5, 0.5, np.zeros(5), seed=1)
        assert np.all(cohort.scores == 0.0)  # logit(0.5) = 0
        assert cohort.scores.var() == 0.0

    def test_construction_reproduces_prevalence(self, preset_beta):
        # oracle: empirical average of expit(S) over the generated cohort
        cohort = generate_lda_cohort(50_000, 100, 0.10, preset_beta, seed=5)
        assert expit(cohort.scores).mean() == pytest.approx(0.10, abs=0.01)

    def test_prevalence_calibration_over_seeds(self, preset_beta):
        prevalences = []
        for seed in range(50):
            cohort = generate_lda_cohort(20_000, 100, 0.10, preset_beta, seed=seed)
            labels = generate_outcomes(cohort, ModificationParams(), seed=seed)
            prevalences.append(labels.mean())
        assert np.mean(prevalences) == pytest.approx(0.10, abs=0.01)

    def test_seed_determinism(self, preset_beta):
        a = generate_lda_cohort(1000, 100, 0.10, preset_beta, seed=9)
        b = generate_lda_cohort(1000, 100, 0.10, preset_beta, seed=9)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.scores, b.scores)

    def test_nonfinite_parameters_rejected(self):
        with pytest.raises(ValueError):
            SourceModel(np.nan, np.array([1.0]))
        with pytest.raises(ValueError):
            generate_lda_cohort(10, 2, 0.1, np.array([np.inf, 0.0]), seed=0)
        with pytest.raises(ValueError):
            generate_lda_cohort(10, 2, 1.5, np.zeros(2), seed=0)


class TestGenerateOutcomes:
    def test_null_modification_matches_score_model(self, preset_beta):
        cohort = generate_lda_cohort(30_000, 100, 0.10, preset_beta, seed=2)
        labels = generate_outcomes(cohort, ModificationParams(0.0, 1.0, None), seed=3)
        assert labels.mean() == pytest.approx(expit(cohort.scores).mean(), abs=0.01)

    def test_downweighted_intercept_lowers_prevalence(self, preset_beta):
        cohort = generate_lda_cohort(30_000, 100, 0.10, preset_beta, seed=2)
        null_labels = generate_outcomes(cohort, ModificationParams(), seed=4)
        mod_labels = generate_outcomes(
            cohort, ModificationParams(-np.log(2), 0.8, None), seed=4
        )
        assert mod_labels.mean() < null_labels.mean()

    def test_extreme_negative_intercept_gives_all_zeros(self):
        # oracle: binomial expectation n * expit(-20) < 1
        rng = np.random.default_rng(0)
        cohort = Cohort(scores=rng.normal(0, 1, 10_000))
        labels = generate_outcomes(cohort, ModificationParams(-20.0, 0.0, None), seed=1)
        assert labels.sum() <= 1

    def test_gamma_requires_features(self):
        cohort = Cohort(scores=np.zeros(5))
        with pytest.raises(ValueError):
            generate_outcomes(cohort, ModificationParams(0, 1, np.ones(3)), seed=0)

    def test_seed_determinism(self, preset_beta):
        cohort = generate_lda_cohort(2000, 100, 0.10, preset_beta, seed=2)
        a = generate_outcomes(cohort, ModificationParams(), seed=8)
        b = generate_outcomes(cohort, ModificationParams(), seed=8)
        assert np.array_equal(a, b)


class TestSerialization:
    def test_csv_round_trip_exact(self, tmp_path):
        cohort = generate_lda_cohort(50, 4, 0.3, np.array([0.5, -0.5, 0.0, 1.0]), seed=6)
        cohort.labels = generate_outcomes(cohort, ModificationParams(), seed=6)
        path = tmp_path / "cohort.csv"
        save_cohort_csv(cohort, path)
        loaded = load_cohort_csv(path)
        assert np.array_equal(loaded.scores, cohort.scores)
        assert np.array_equal(loaded.features, cohort.features)
        assert np.array_equal(loaded.labels, cohort.labels)

    def test_npz_round_trip_exact(self, tmp_path):
        cohort = generate_lda_cohort(50, 4, 0.3, np.array([0.5, -0.5, 0.0, 1.0]), seed=6)
        path = tmp_path / "cohort.npz"
        save_cohort_npz(cohort, path)
        loaded = load_cohort_npz(path)
        assert np.array_equal(loaded.scores, cohort.scores)
        assert np.array_equal(loaded.features, cohort.features)
        assert loaded.labels is None

    def test_csv_without_labels_round_trips(self, tmp_path):
        cohort = generate_lda_cohort(20, 2, 0.5, np.array([0.1, 0.2]), seed=1)
        path = tmp_path / "c.csv"
        save_cohort_csv(cohort, path)
        loaded = load_cohort_csv(path)
        assert loaded.labels is None
        assert np.array_equal(loaded.scores, cohort.scores)

    def test_score_only_csv(self):
        loaded = load_cohort_csv(io.StringIO("score\n0.5\n-1.25\n"))
        assert loaded.features is None
        assert np.array_equal(loaded.scores, [0.5, -1.25])

    def test_bad_rows_cite_line_numbers(self):
        with pytest.raises(ValueError, match="row 3"):
            load_cohort_csv(io.StringIO("score\n1.0\nnan\n"))
        with pytest.raises(ValueError, match="row 2"):
            load_cohort_csv(io.StringIO("score\nabc\n"))
        with pytest.raises(ValueError, match="empty"):
            load_cohort_csv(io.StringIO(""))
