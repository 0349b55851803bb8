import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import infodep.binning as binning
from infodep import (BinCounts, DegenerateRangeError, DomainError, EmptyInputError,
                     OutOfRangeError, histogram_counts, joint_histogram_counts,
                     log_posterior_m, mi_bayes, mi_fixed_hist, mutual_information_plugin,
                     optimal_bins, posterior_entropy, sample_bin_probabilities)

from oracles import dirichlet_expected_entropy, log_posterior_direct, optimal_bins_direct

seeds = st.integers(0, 2**32 - 1)


class TestHistogramCounts:
    def test_last_bin_closed(self):
        bc = histogram_counts([0, 0.5, 1], 2, (0, 1))
        assert bc.counts.tolist() == [1, 2]
        assert bc.n_total == 3 and bc.range_volume == 1.0 and bc.m == 2

    def test_interior_points(self):
        assert histogram_counts([0.25, 0.75], 2, (0, 1)).counts.tolist() == [1, 1]

    def test_constant_data_auto_range(self):
        with pytest.raises(DegenerateRangeError):
            histogram_counts([3.0, 3.0, 3.0], 4)

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            histogram_counts([], 3, (0, 1))

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            histogram_counts([0.5, 1.5], 2, (0, 1))

    def test_inverted_range(self):
        with pytest.raises(DegenerateRangeError):
            histogram_counts([0.5], 2, (1, 0))

    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=200), st.integers(1, 50))
    def test_counts_sum_to_n(self, data, m):
        if min(data) == max(data):
            return
        bc = histogram_counts(data, m)
        assert bc.counts.sum() == len(data) == bc.n_total
        assert bc.counts.size == m


class TestJointHistogram:
    def test_diagonal(self):
        bc = joint_histogram_counts([0, 1], [0, 1], 2, 2)
        assert bc.counts.tolist() == [1, 0, 0, 1]
        assert bc.dims == 2 and bc.m == 4 and bc.shape == (2, 2)

    def test_anti_diagonal(self):
        assert joint_histogram_counts([0, 1], [1, 0], 2, 2).counts.tolist() == [0, 1, 1, 0]

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            joint_histogram_counts([], [], 2, 2)

    def test_area(self):
        bc = joint_histogram_counts([0, 2], [0, 3], 2, 3)
        assert bc.range_volume == 6.0 and bc.m == 6

    @given(seeds, st.integers(1, 12), st.integers(1, 12))
    def test_swap_transposes_counts(self, seed, mx, my):
        x, y = np.random.default_rng(seed).standard_normal((2, 100))
        a = joint_histogram_counts(x, y, mx, my).transposed()
        b = joint_histogram_counts(y, x, my, mx)
        assert a.shape == b.shape
        assert np.array_equal(a.counts, b.counts)


class TestBinCounts:
    def test_mismatched_total(self):
        with pytest.raises(DomainError):
            BinCounts([1, 2], 2, 4, 1.0)

    def test_nonpositive_volume(self):
        with pytest.raises(DegenerateRangeError):
            BinCounts([1, 2], 2, 3, 0.0)


class TestLogPosterior:
    @given(st.lists(st.integers(0, 10_000), min_size=1, max_size=1), st.floats(1e-4, 50))
    def test_single_bin_is_zero(self, counts, beta):
        bc = BinCounts(counts, 1, sum(counts), 1.0)
        assert log_posterior_m(bc, beta) == 0.0

    def test_two_bins_against_direct_terms(self):
        bc = BinCounts([2, 0], 2, 2, 1.0)
        expected = (2 * math.log(2) + math.lgamma(1) - 2 * math.lgamma(0.5) - math.lgamma(3)
                    + math.lgamma(2.5) + math.lgamma(0.5))
        assert expected == pytest.approx(0.40546510810816483, abs=1e-14)
        assert log_posterior_m(bc, 0.5) == pytest.approx(expected, abs=1e-12)

    def test_balanced_split_against_oracle(self):
        balanced = log_posterior_m(BinCounts([1, 1], 2, 2, 1.0), 0.5)
        lopsided = log_posterior_m(BinCounts([2, 0], 2, 2, 1.0), 0.5)
        assert balanced == pytest.approx(log_posterior_direct([1, 1], 0.5), abs=1e-12)
        assert balanced == pytest.approx(-0.6931471805599461, abs=1e-12)
        assert balanced != lopsided

    @given(st.lists(st.integers(0, 500), min_size=2, max_size=40), st.floats(0.01, 5))
    def test_matches_direct(self, counts, beta):
        bc = BinCounts(counts, len(counts), sum(counts), 1.0)
        assert log_posterior_m(bc, beta) == pytest.approx(log_posterior_direct(counts, beta),
                                                          rel=1e-10, abs=1e-8)

    @pytest.mark.parametrize("beta", [0.0, -1.0])
    def test_beta_domain(self, beta):
        with pytest.raises(DomainError):
            log_posterior_m(BinCounts([1, 1], 2, 2, 1.0), beta)

    def test_finite_for_large_inputs(self, rng):
        counts = rng.multinomial(1_000_000, np.full(1000, 1e-3))
        for beta in (0.05, 0.5, 2.0):
            assert math.isfinite(log_posterior_m(BinCounts(counts, 1000, 1_000_000, 1.0), beta))

    def test_bin_order_does_not_matter(self, rng):
        counts = rng.integers(0, 50, 30)
        a = log_posterior_m(BinCounts(counts, 30, int(counts.sum()), 1.0), 0.5)
        b = log_posterior_m(BinCounts(counts[::-1], 30, int(counts.sum()), 1.0), 0.5)
        assert a == b


class TestOptimalBins:
    def test_single_bin_prior(self, rng):
        assert optimal_bins(rng.standard_normal(300), max_bins=1) == 1

    def test_gaussian_matches_exhaustive_scan(self, rng):
        data = rng.standard_normal(1000)
        assert optimal_bins(data, 0.5, 100) == optimal_bins_direct(data, 0.5, 100)

    def test_two_clusters(self, rng):
        data = np.concatenate([rng.normal(0, 0.1, 500), rng.normal(10, 0.1, 500)])
        m = optimal_bins(data, 0.5)
        assert m >= 2
        assert m == optimal_bins_direct(data, 0.5, binning.default_max_bins(1000))

    def test_degenerate(self):
        with pytest.raises(DegenerateRangeError):
            optimal_bins(np.full(20, 1.5))

    def test_ties_go_to_smaller_m(self, monkeypatch, rng):
        monkeypatch.setattr(binning, "_log_posterior", lambda counts, m, beta: 1.0)
        assert optimal_bins(rng.standard_normal(100), max_bins=20) == 1

    def test_default_cap(self):
        assert binning.default_max_bins(10) == 5
        assert binning.default_max_bins(10_000) == 200
        assert binning.default_max_bins(1) == 1

    @given(seeds, st.floats(0.1, 100), st.floats(-50, 50), st.booleans())
    def test_affine_invariance(self, seed, scale, shift, flip):
        data = np.random.default_rng(seed).standard_normal(400)
        a = -scale if flip else scale
        assert optimal_bins(a * data + shift, 0.5, 60) == optimal_bins(data, 0.5, 60)


class TestSampling:
    def test_posterior_mean(self):
        bc = BinCounts([3, 1], 2, 4, 1.0)
        draws = sample_bin_probabilities(bc, 0.5, 10_000, seed=1)
        se = draws[:, 0].std() / math.sqrt(len(draws))
        assert abs(draws[:, 0].mean() - 0.7) < 3 * se

    def test_simplex(self):
        bc = BinCounts([5, 0, 0, 2, 9], 5, 16, 1.0)
        draws = sample_bin_probabilities(bc, 0.05, 500, seed=3)
        assert draws.shape == (500, 5)
        assert np.all(draws >= 0)
        assert np.allclose(draws.sum(axis=1), 1.0, atol=1e-9)

    def test_seed_determinism(self):
        bc = BinCounts([4, 4, 1], 3, 9, 1.0)
        a = sample_bin_probabilities(bc, 0.5, 100, seed=42)
        b = sample_bin_probabilities(bc, 0.5, 100, seed=42)
        c = sample_bin_probabilities(bc, 0.5, 100, seed=43)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    @pytest.mark.parametrize("n_draws", [0, -3, 2.5])
    def test_bad_draw_count(self, n_draws):
        with pytest.raises(DomainError):
            sample_bin_probabilities(BinCounts([1, 1], 2, 2, 1.0), 0.5, n_draws)


class TestPosteriorEntropy:
    def test_single_bin(self):
        est = posterior_entropy(BinCounts([17], 1, 17, 2.0), 0.5, 200, seed=0)
        assert est.mean == 0.0 and est.std_dev == 0.0

    def test_closed_form_eight_two(self):
        expected = dirichlet_expected_entropy([9, 3])
        assert expected == pytest.approx(0.5231511544011545, abs=1e-14)
        est = posterior_entropy(BinCounts([8, 2], 2, 10, 1.0), 1.0, 100_000, seed=5)
        assert abs(est.mean - expected) < 3 * est.std_error

    @pytest.mark.parametrize("k", [1, 10, 100, 1000])
    def test_symmetric_counts_below_log2(self, k):
        est = posterior_entropy(BinCounts([k, k], 2, 2 * k, 1.0), 0.5, 2000, seed=k)
        assert est.mean <= math.log(2)
        if k == 1000:
            assert est.mean == pytest.approx(math.log(2), abs=1e-3)

    def test_random_counts_against_closed_form(self, rng):
        for case in range(20):
            m = int(rng.integers(2, 15))
            counts = rng.multinomial(int(rng.integers(1, 300)), rng.dirichlet(np.ones(m)))
            beta = float(rng.choice([0.05, 0.5, 1.0, 2.0]))
            est = posterior_entropy(BinCounts(counts, m, int(counts.sum()), 1.0), beta,
                                    5000, seed=case)
            assert abs(est.mean - dirichlet_expected_entropy(counts + beta)) < 3 * est.std_error

    def test_bits_and_differential(self):
        bc = BinCounts([5, 3, 2, 0], 4, 10, 8.0)
        nats = posterior_entropy(bc, 0.5, 300, seed=9)
        bits = posterior_entropy(bc, 0.5, 300, seed=9, base="bits")
        diff = posterior_entropy(bc, 0.5, 300, seed=9, differential=True)
        assert bits.mean == pytest.approx(nats.mean / math.log(2), rel=1e-12)
        assert diff.mean == pytest.approx(nats.mean + math.log(2.0), rel=1e-12)
        assert diff.std_dev == pytest.approx(nats.std_dev, rel=1e-9)


class TestMIBayes:
    def test_independent_uniform(self, rng):
        x, y = rng.random((2, 10_000))
        est = mi_bayes(x, y, beta=0.05, seed=0)
        assert abs(est.mean) < 0.02

    def test_identity_on_fixed_grid(self, rng):
        x = rng.random(2000)
        joint = joint_histogram_counts(x, x, 8, 8)
        marginal = histogram_counts(x, 8)
        # the joint counts sit on the diagonal and reproduce the marginal
        assert np.array_equal(np.diag(joint.reshaped()), marginal.counts)
        assert joint.reshaped().sum() == np.trace(joint.reshaped())
        est = mi_bayes(x, x, beta=0.05, bins=(8, 8), n_draws=2000, seed=1)
        h = posterior_entropy(marginal, 0.05, 2000, seed=1)
        assert est.mean > 0
        assert est.mean == pytest.approx(h.mean, abs=0.05)

    def test_determinism(self, rng):
        x, y = rng.standard_normal((2, 500))
        assert mi_bayes(x, y, seed=11) == mi_bayes(x, y, seed=11)

    def test_swap_symmetry_within_monte_carlo_error(self, rng):
        x = rng.standard_normal(3000)
        y = x + rng.standard_normal(3000)
        a = mi_bayes(x, y, 0.5, n_draws=4000, seed=1)
        b = mi_bayes(y, x, 0.5, n_draws=4000, seed=2)
        assert (a.m_x, a.m_y) == (b.m_y, b.m_x)
        assert abs(a.mean - b.mean) < 4 * math.hypot(a.std_error, b.std_error)

    def test_bin_choices(self, rng):
        x, y = rng.standard_normal((2, 1000))
        auto = mi_bayes(x, y, seed=0)
        assert auto.m_x == auto.m_y
        marginal = mi_bayes(x, y, bins="marginal", seed=0)
        assert marginal.m_x == optimal_bins(x, 0.5) and marginal.m_y == optimal_bins(y, 0.5)
        fixed = mi_bayes(x, y, bins=(3, 5), seed=0)
        assert (fixed.m_x, fixed.m_y) == (3, 5)
        with pytest.raises(DomainError):
            mi_bayes(x, y, bins="sturges")

    def test_degenerate_axis(self, rng):
        with pytest.raises(DegenerateRangeError):
            mi_bayes(np.ones(100), rng.random(100))

    def test_bad_beta(self, rng):
        with pytest.raises(DomainError):
            mi_bayes(*rng.random((2, 50)), beta=0)

    @given(seeds, st.floats(0.1, 100), st.floats(-50, 50))
    def test_affine_invariance(self, seed, scale, shift):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(300)
        y = x + rng.standard_normal(300)
        ref = mi_bayes(x, y, 0.5, n_draws=50, seed=seed)
        assert mi_bayes(scale * x + shift, y, 0.5, n_draws=50, seed=seed) == ref
        assert mi_bayes(x, scale * y - shift, 0.5, n_draws=50, seed=seed) == ref


class TestMIFixedHist:
    def test_identity(self):
        x = np.repeat([0.0, 1.0, 2.0, 3.0], 25)
        assert mi_fixed_hist(x, x, 4) == pytest.approx(math.log(4), abs=1e-12)

    def test_upward_bias_exceeds_bayes(self, rng):
        x, y = rng.random((2, 10_000))
        fixed = mi_fixed_hist(x, y, 30)
        assert fixed > 0
        assert fixed > mi_bayes(x, y, beta=0.05, seed=0).mean

    def test_single_occupied_cell(self):
        # one observation is a degenerate range; its plug-in table is a single cell
        with pytest.raises(Exception):
            mi_fixed_hist([1.0], [2.0], 3)
        table = np.zeros((3, 3))
        table[1, 2] = 1.0
        assert mutual_information_plugin(table) == 0.0

    @given(seeds, st.floats(0.1, 100), st.floats(-50, 50), st.booleans(), st.integers(1, 30))
    def test_affine_invariance(self, seed, scale, shift, flip, m):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(300)
        y = np.sin(x) + 0.3 * rng.standard_normal(300)
        a = -scale if flip else scale
        assert mi_fixed_hist(a * x + shift, y, m) == mi_fixed_hist(x, y, m)
