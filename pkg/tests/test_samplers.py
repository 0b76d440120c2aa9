"""Distributional checks for the randomized sorting procedures."""

import itertools
import math
import warnings

import numpy as np
import pytest

from onlinerank.core import Ranking, rank_by_scores
from onlinerank.evaluation import (
    goodness_of_fit_pvalue,
    homogeneity_pvalue,
    ranking_histogram,
)
from onlinerank.samplers import (
    SAMPLERS,
    RngStream,
    pairwise_marginal,
    plackett_luce_gumbel,
    plackett_luce_log_prob,
    plackett_luce_sample,
    quicksort_sample,
    sample_positions,
)


def reference_quicksort(w, rng):
    """Direct recursive transliteration of the noisy-quicksort procedure.

    Kept deliberately naive and independent of the package's vectorized
    engine; used as the distributional oracle for it.
    """

    def sort(items):
        if len(items) <= 1:
            return list(items)
        pivot = items[rng.integers(len(items))]
        left, right = [], []
        for v in items:
            if v == pivot:
                continue
            p_left = 1.0 / (1.0 + math.exp(w[pivot] - w[v]))
            (left if rng.random() < p_left else right).append(v)
        return sort(left) + [pivot] + sort(right)

    return Ranking.from_order(sort(list(range(len(w)))))


def empirical_pair_freq(positions, u, v):
    return float(np.mean(positions[:, u] < positions[:, v]))


def within_4se(freq, p, m):
    return abs(freq - p) <= 4 * math.sqrt(p * (1 - p) / m)


class TestRngStream:
    def test_same_key_replays(self):
        a = RngStream(123, 4).generator().random(10)
        b = RngStream(123, 4).generator().random(10)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        a = RngStream(123, 0).generator().random(10)
        b = RngStream(123, 1).generator().random(10)
        assert not np.array_equal(a, b)


class TestPairwiseMarginal:
    def test_equal_weights(self):
        assert pairwise_marginal([0.0, 0.0], 0, 1) == 0.5

    def test_log3_difference(self):
        assert pairwise_marginal([math.log(3), 0.0], 0, 1) == pytest.approx(0.75)

    def test_extreme_difference_underflows_cleanly(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            p = pairwise_marginal([0.0, 800.0], 0, 1)
        # The true value e^{-800} is below the smallest positive double,
        # so exact positivity is unattainable; tiny-and-finite is the
        # achievable contract.
        assert 0.0 <= p <= 1e-300 and np.isfinite(p)
        assert pairwise_marginal([800.0, 0.0], 0, 1) == pytest.approx(1.0)

    def test_rejects_diagonal_and_bad_weights(self):
        with pytest.raises(ValueError):
            pairwise_marginal([0.0, 1.0], 1, 1)
        with pytest.raises(ValueError):
            pairwise_marginal([np.inf, 0.0], 0, 1)

    def test_translation_invariant(self):
        # Bit-exact when the shifted weights are exactly representable;
        # within an ulp otherwise.
        w = np.array([0.5, -1.25, 2.0])
        for u, v in itertools.permutations(range(3), 2):
            assert pairwise_marginal(w, u, v) == pairwise_marginal(w + 57.0, u, v)
        w = np.array([0.3, -1.2, 2.0])
        for u, v in itertools.permutations(range(3), 2):
            assert pairwise_marginal(w, u, v) == pytest.approx(
                pairwise_marginal(w + 57.0, u, v), rel=1e-12
            )


@pytest.mark.parametrize("sampler", list(SAMPLERS.values()))
class TestSamplerBasics:
    def test_singleton(self, sampler):
        rng = RngStream(1, 0).generator()
        assert sampler(np.array([3.0]), rng) == Ranking.identity(1)

    def test_outputs_are_valid_rankings(self, sampler):
        rng = RngStream(2, 0).generator()
        w = rng.normal(size=7)
        for _ in range(200):
            r = sampler(w, rng)
            assert np.array_equal(np.sort(r.positions), np.arange(1, 8))

    def test_rejects_nonfinite_weights(self, sampler):
        rng = RngStream(3, 0).generator()
        with pytest.raises(ValueError):
            sampler(np.array([0.0, np.nan]), rng)

    def test_extreme_weights_no_overflow(self, sampler):
        rng = RngStream(4, 0).generator()
        w = np.array([800.0, 0.0, -800.0, 400.0])
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            for _ in range(50):
                r = sampler(w, rng)
        # magnitude-800 gaps make the order essentially deterministic
        assert r.order().tolist() == [0, 3, 1, 2]

    def test_translation_invariance_same_stream(self, sampler):
        w = np.array([0.5, -1.0, 2.0, 0.0, 1.3])
        for shift in (-100.0, 57.0):
            a = sampler(w, RngStream(5, 0).generator())
            b = sampler(w + shift, RngStream(5, 0).generator())
            assert a == b


class TestQuicksort:
    def test_uniform_at_equal_weights(self):
        m, n = 100_000, 5
        rng = RngStream(6, 0).generator()
        positions = sample_positions("quicksort", np.zeros(n), m, rng)
        counts = ranking_histogram(positions, n)
        probs = np.full(math.factorial(n), 1.0 / math.factorial(n))
        assert goodness_of_fit_pvalue(counts, probs) > 0.001
        freqs = counts / m
        se = math.sqrt((1 / 120) * (1 - 1 / 120) / m)
        assert np.all(np.abs(freqs - 1 / 120) <= 4 * se + 1e-12)

    def test_large_gap_pair(self):
        # Pr[u before v] = 1/(1+e^10) ~ 4.54e-5
        m = 100_000
        rng = RngStream(7, 0).generator()
        positions = sample_positions("quicksort", np.array([0.0, 10.0]), m, rng)
        assert empirical_pair_freq(positions, 0, 1) <= 1e-3

    def test_matches_recursive_reference_distribution(self):
        # Oracle: a naive recursive implementation of the same procedure.
        m, n = 20_000, 4
        w = np.array([0.8, -0.5, 0.1, 1.4])
        rng = RngStream(8, 0).generator()
        fast = ranking_histogram(sample_positions("quicksort", w, m, rng), n)
        ref_positions = np.array(
            [reference_quicksort(w, rng).positions for _ in range(m)]
        )
        ref = ranking_histogram(ref_positions, n)
        assert homogeneity_pvalue(fast, ref) > 0.001

    def test_marginals_on_random_triples(self):
        n, m = 8, 20_000
        rng = RngStream(9, 0).generator()
        for _ in range(5):
            w = rng.uniform(-3, 3, n)
            positions = sample_positions("quicksort", w, m, rng)
            for u, v in [(0, 1), (2, 6), (3, 7)]:
                p = pairwise_marginal(w, u, v)
                assert within_4se(empirical_pair_freq(positions, u, v), p, m)


class TestPlackettLuce:
    def test_two_items_fair(self):
        m = 20_000
        rng = RngStream(10, 0).generator()
        positions = sample_positions("pl", np.zeros(2), m, rng)
        assert within_4se(empirical_pair_freq(positions, 0, 1), 0.5, m)

    def test_chain_rule_probability(self):
        # w = (log 1, log 2, log 3); Pr[order c,b,a] = (3/6)*(2/3)*1 = 1/3
        w = np.log([1.0, 2.0, 3.0])
        target_order = (2, 1, 0)
        oracle = (3 / 6) * (2 / 3) * 1.0
        assert oracle == pytest.approx(1 / 3)
        exact = math.exp(plackett_luce_log_prob(w, Ranking.from_order(target_order)))
        assert exact == pytest.approx(oracle, rel=1e-12)
        m = 30_000
        rng = RngStream(11, 0).generator()
        positions = sample_positions("pl", w, m, rng)
        orders = np.argsort(positions, axis=1)
        freq = np.mean(np.all(orders == np.array(target_order), axis=1))
        assert abs(freq - oracle) <= 4 * math.sqrt(oracle * (1 - oracle) / m)

    def test_dominant_item_first(self):
        m = 10_000
        w = np.array([20.0, 0.0, 0.0, 0.0])
        rng = RngStream(12, 0).generator()
        positions = sample_positions("pl", w, m, rng)
        assert np.mean(positions[:, 0] == 1) >= 0.999

    def test_log_prob_sums_to_one(self):
        rng = RngStream(13, 0).generator()
        w = rng.normal(size=4)
        total = sum(
            math.exp(plackett_luce_log_prob(w, Ranking.from_order(o)))
            for o in itertools.permutations(range(4))
        )
        assert total == pytest.approx(1.0, rel=1e-10)


class TestGumbel:
    def test_two_items_fair(self):
        m = 20_000
        rng = RngStream(14, 0).generator()
        positions = sample_positions("pl-gumbel", np.zeros(2), m, rng)
        assert within_4se(empirical_pair_freq(positions, 0, 1), 0.5, m)

    def test_equal_perturbed_scores_deterministic(self):
        # The tie-break rule itself: equal scores sort by item index.
        assert rank_by_scores(np.zeros(5)).order().tolist() == [0, 1, 2, 3, 4]

    def test_matches_sequential_distribution(self):
        n, m = 3, 30_000
        rng = RngStream(15, 0).generator()
        w = rng.normal(size=n)
        a = ranking_histogram(sample_positions("pl-gumbel", w, m, rng), n)
        b = ranking_histogram(sample_positions("pl", w, m, rng), n)
        assert homogeneity_pvalue(a, b) > 0.001

    def test_matches_exact_probabilities(self):
        n, m = 4, 50_000
        rng = RngStream(16, 0).generator()
        w = rng.normal(size=n)
        counts = ranking_histogram(sample_positions("pl-gumbel", w, m, rng), n)
        probs = [
            math.exp(plackett_luce_log_prob(w, Ranking.from_order(o)))
            for o in itertools.permutations(range(n))
        ]
        assert goodness_of_fit_pvalue(counts, np.array(probs)) > 0.001


class TestSamplePositions:
    def test_chunking_consistent_shape(self):
        rng = RngStream(17, 0).generator()
        positions = sample_positions("pl-gumbel", np.zeros(4), 2_500, rng, chunk=1_000)
        assert positions.shape == (2_500, 4)
        assert np.all(np.sort(positions, axis=1) == np.arange(1, 5))

    def test_accepts_function_or_name(self):
        rng = RngStream(18, 0).generator()
        a = sample_positions(quicksort_sample, np.zeros(3), 10, rng)
        assert a.shape == (10, 3)
        with pytest.raises(ValueError):
            sample_positions("bogosort", np.zeros(3), 10, rng)

    def test_translation_invariance_in_distribution(self):
        # chi-square over full rankings, n = 4
        n, m = 4, 20_000
        rng = RngStream(19, 0).generator()
        w = rng.normal(size=n)
        a = ranking_histogram(sample_positions("quicksort", w, m, rng), n)
        b = ranking_histogram(sample_positions("quicksort", w + 31.0, m, rng), n)
        assert homogeneity_pvalue(a, b) > 0.001
