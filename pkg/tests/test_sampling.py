import numpy as np
import pytest

from pccdesign.datagen import Cohort
from pccdesign.sampling import (
    DesignConfig,
    InfeasibleDesignError,
    Sample,
    inclusion_weight,
    load_sample_json,
    max_feasible_n,
    pcc_sample,
    save_sample_json,
    srs_sample,
)


@pytest.fixture(scope="module")
def score_cohort():
    rng = np.random.default_rng(10)
    return Cohort(scores=rng.normal(0.0, 1.5, size=2000))


class TestSrs:
    def test_full_cohort_sample(self, score_cohort):
        s = srs_sample(score_cohort, score_cohort.n, seed=0)
        assert np.array_equal(np.sort(s.indices), np.arange(score_cohort.n))

    def test_empty_sample(self, score_cohort):
        s = srs_sample(score_cohort, 0, seed=0)
        assert s.indices.size == 0

    def test_oversized_sample_rejected(self, score_cohort):
        with pytest.raises(ValueError):
            srs_sample(score_cohort, score_cohort.n + 1, seed=0)

    def test_inclusion_frequency_concentrates(self):
        # binomial concentration: half-sampling over 200 seeds puts every
        # row's inclusion frequency within 0.10 of 0.5
        cohort = Cohort(scores=np.linspace(-2, 2, 100))
        counts = np.zeros(cohort.n)
        for seed in range(200):
            counts[srs_sample(cohort, cohort.n // 2, seed).indices] += 1
        freq = counts / 200
        assert np.all(np.abs(freq - 0.5) < 0.10)
        assert abs(freq.mean() - 0.5) < 0.005


class TestPcc:
    def test_even_split_at_half_weight(self):
        rng = np.random.default_rng(1)
        scores = np.concatenate([rng.normal(4, 0.5, 400), rng.normal(0, 0.5, 800)])
        s = pcc_sample(Cohort(scores=scores), DesignConfig(2.5, 0.50), 300, seed=3)
        assert s.n == 300
        assert (scores[s.indices] > 2.5).sum() == 150
        assert (scores[s.indices] <= 2.5).sum() == 150

    @pytest.mark.parametrize("w", [0.1, 0.25, 0.5, 0.62, 0.9])
    @pytest.mark.parametrize("n", [37, 100, 333])
    def test_stratum_composition_is_exact(self, score_cohort, w, n):
        config = DesignConfig(0.5, w)
        s = pcc_sample(score_cohort, config, n, seed=5)
        expected_high = int(np.floor(n * w + 0.5))
        assert (score_cohort.scores[s.indices] > 0.5).sum() == expected_high

    def test_half_up_rounding(self):
        scores = np.concatenate([np.full(50, 2.0), np.full(50, -2.0)])
        s = pcc_sample(Cohort(scores=scores), DesignConfig(0.0, 0.5), 5, seed=1)
        assert (scores[s.indices] > 0).sum() == 3  # 2.5 rounds up

    def test_ties_at_cutoff_go_to_low_stratum(self):
        scores = np.array([1.0] * 10 + [2.0] * 10)
        s = pcc_sample(Cohort(scores=scores), DesignConfig(1.0, 1.0), 10, seed=2)
        assert np.all(scores[s.indices] == 2.0)  # strict inequality: 1.0 is low

    def test_stratum_exhaustion_raises_with_stratum_name(self):
        scores = np.concatenate([np.full(105, 3.0), np.full(5000, -1.0)])
        cohort = Cohort(scores=scores)
        config = DesignConfig(2.0, 0.50)
        assert max_feasible_n(cohort, config) == 210
        with pytest.raises(InfeasibleDesignError) as exc:
            pcc_sample(cohort, config, 300, seed=0)
        assert exc.value.stratum == "high"
        assert exc.value.available == 105

    def test_label_independence(self):
        # two cohorts identical in scores but different labels -> same indices
        scores = np.random.default_rng(8).normal(size=500)
        a = Cohort(scores=scores, labels=np.zeros(500, dtype=np.int8))
        b = Cohort(scores=scores, labels=np.ones(500, dtype=np.int8))
        config = DesignConfig(0.0, 0.4)
        sa = pcc_sample(a, config, 100, seed=21)
        sb = pcc_sample(b, config, 100, seed=21)
        assert np.array_equal(sa.indices, sb.indices)
        assert np.array_equal(
            srs_sample(a, 100, seed=21).indices, srs_sample(b, 100, seed=21).indices
        )


class TestSrsEquivalence:
    def test_pcc_matches_srs_inclusion_frequencies(self):
        rng = np.random.default_rng(0)
        scores = rng.normal(-1.0, 1.0, size=2000)
        k = 0.0
        w_hat = float((scores > k).mean())
        cohort = Cohort(scores=scores)
        config = DesignConfig(k, w_hat)
        n = 200
        pcc_counts = np.zeros(2000)
        srs_counts = np.zeros(2000)
        for seed in range(500):
            pcc_counts[pcc_sample(cohort, config, n, seed).indices] += 1
            srs_counts[srs_sample(cohort, n, seed).indices] += 1
        diff = np.abs(pcc_counts - srs_counts) / 500
        assert diff.max() < 0.05


class TestInclusionWeight:
    def test_srs_equivalent_weight(self):
        config = DesignConfig(1.0, 0.25)
        for score in (-3.0, 0.5, 2.0):
            assert inclusion_weight(score, config, 0.25, 0.1) == pytest.approx(0.1)

    def test_high_stratum_upweighting(self):
        config = DesignConfig(0.0, 0.50)
        assert inclusion_weight(1.0, config, 0.25, 0.1) == pytest.approx(0.2)

    def test_low_stratum_downweighting(self):
        config = DesignConfig(0.0, 0.50)
        expected = 0.1 * (0.5 / 0.75)
        assert inclusion_weight(-1.0, config, 0.25, 0.1) == pytest.approx(expected)

    def test_degenerate_strata_rejected(self):
        with pytest.raises(ValueError):
            inclusion_weight(0.0, DesignConfig(0.0, 0.5), 0.0, 0.1)
        with pytest.raises(ValueError):
            inclusion_weight(0.0, DesignConfig(0.0, 0.5), 1.0, 0.1)


class TestMaxFeasibleN:
    def test_floor_arithmetic(self):
        scores = np.concatenate([np.full(105, 3.0), np.full(100_000, -1.0)])
        assert max_feasible_n(Cohort(scores=scores), DesignConfig(2.0, 0.5)) == 210

    def test_large_high_stratum(self):
        scores = np.concatenate([np.full(461, 3.0), np.full(100_000, -1.0)])
        assert max_feasible_n(Cohort(scores=scores), DesignConfig(0.8, 0.5)) == 922

    def test_unit_weight_limited_by_high_stratum_only(self):
        scores = np.concatenate([np.full(10, 3.0), np.full(5, -1.0)])
        assert max_feasible_n(Cohort(scores=scores), DesignConfig(0.0, 1.0)) == 10

    def test_zero_weight_limited_by_low_stratum_only(self):
        scores = np.concatenate([np.full(3, 3.0), np.full(50, -1.0)])
        assert max_feasible_n(Cohort(scores=scores), DesignConfig(0.0, 0.0)) == 50


class TestSampleSerialization:
    def test_json_round_trip(self, tmp_path, score_cohort):
        s = pcc_sample(score_cohort, DesignConfig(0.25, 0.3), 50, seed=4)
        path = tmp_path / "sample.json"
        save_sample_json(s, path)
        loaded = load_sample_json(path)
        assert np.array_equal(loaded.indices, s.indices)
        assert loaded.design == "PCC"
        assert loaded.config == s.config

    def test_duplicate_indices_rejected(self):
        with pytest.raises(ValueError):
            Sample(indices=np.array([1, 1, 2]), design="SRS", n=3)
