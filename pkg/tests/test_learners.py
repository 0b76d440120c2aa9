"""Learner state, update rules, and tuned-rate formulas."""

import itertools
import math

import numpy as np
import pytest

from onlinerank.core import Ranking, Setting, pairwise_loss
from onlinerank.evaluation import goodness_of_fit_pvalue, ranking_histogram
from onlinerank.learners import (
    ExplicitMw,
    Fpl,
    FplConfig,
    LearnerConfig,
    OnlineRank,
    learning_rate,
    make_learner,
)
from onlinerank.samplers import RngStream, pairwise_marginal


def single_config(n=3, T=100, eta=0.5, sampler="pl-gumbel"):
    return LearnerConfig(n=n, T=T, setting=Setting("single"), eta=eta, sampler=sampler)


class TestLearningRate:
    def test_benchmark_value(self):
        assert learning_rate(10, 2000, 10) == pytest.approx(0.05887, abs=5e-6)

    def test_at_most_one_on_long_horizons(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(2, 50))
            M = float(rng.choice([n, 3 * n, n * n / 4]))
            T = int(math.ceil(n * n * math.log(2) / M)) + int(rng.integers(0, 1000))
            assert learning_rate(n, T, M) <= 1.0 + 1e-12

    def test_short_horizon_warns_but_returns(self):
        with pytest.warns(RuntimeWarning):
            eta = learning_rate(10, 2, 10)
        assert eta == pytest.approx(10 * math.sqrt(math.log(2)) / math.sqrt(20))

    def test_spearman_rate_shape(self):
        n, T = 5, 200
        assert learning_rate(n, T, float(n) ** 4) == pytest.approx(
            math.sqrt(math.log(2)) / (n * math.sqrt(T))
        )

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            learning_rate(5, 0, 10)
        with pytest.raises(ValueError):
            learning_rate(5, 10, -1)


class TestLearnerConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            single_config(T=0)
        with pytest.raises(ValueError):
            single_config(eta=0.0)
        with pytest.raises(ValueError):
            single_config(sampler="mergesort")

    def test_eta_above_one_warns(self):
        with pytest.warns(RuntimeWarning):
            single_config(eta=1.5)

    def test_auto_uses_tuned_rate(self):
        config = LearnerConfig.auto(10, 2000, Setting("single"))
        assert config.eta == pytest.approx(learning_rate(10, 2000, 10))


class TestOnlineRank:
    def test_single_update(self):
        learner = OnlineRank(single_config(eta=0.5))
        learner.update([0, 1, 0])
        assert learner.weights.tolist() == [0.0, 0.5, 0.0]
        assert learner.t == 1

    def test_spearman_update(self):
        config = LearnerConfig(n=3, T=10, setting=Setting("spearman"), eta=0.1)
        learner = OnlineRank(config)
        learner.update([-1, -2, -3])
        assert np.allclose(learner.weights, [-0.1, -0.2, -0.3])

    def test_repeated_updates_accumulate_exactly(self):
        T = 1000
        learner = OnlineRank(single_config(eta=0.1, T=T))
        for _ in range(T):
            learner.update([1, 0, 0])
        # weights are eta * raw totals, so no per-step drift accumulates
        assert learner.weights[0] == 0.1 * T

    def test_weights_track_eta_scaled_totals(self):
        rng = np.random.default_rng(3)
        eta = 0.37
        learner = OnlineRank(single_config(n=5, eta=eta, T=200))
        totals = np.zeros(5)
        for _ in range(100):
            s = np.zeros(5)
            s[rng.integers(5)] = 1
            learner.update(s)
            totals += s
        assert np.array_equal(learner.weights, eta * totals)

    def test_initial_marginals_fair(self):
        learner = OnlineRank(single_config(n=4))
        assert np.all(learner.weights == 0)
        for u, v in itertools.combinations(range(4), 2):
            assert pairwise_marginal(learner.weights, u, v) == 0.5

    def test_repeated_feedback_shifts_marginal(self):
        learner = OnlineRank(single_config(eta=0.1, T=200))
        for _ in range(100):
            learner.update([1, 0, 0])
        expected = 1.0 / (1.0 + math.exp(-10.0))
        assert pairwise_marginal(learner.weights, 0, 1) == pytest.approx(expected)

    def test_step_is_read_only(self):
        learner = OnlineRank(single_config())
        learner.update([0, 0, 1])
        before = learner.weights.copy()
        a = learner.step(RngStream(0, 0).generator())
        b = learner.step(RngStream(0, 0).generator())
        assert a == b
        assert np.array_equal(learner.weights, before)
        assert learner.t == 1

    def test_horizon_exhaustion(self):
        learner = OnlineRank(single_config(T=1))
        rng = RngStream(1, 0).generator()
        learner.step(rng)
        learner.update([1, 0, 0])
        with pytest.raises(RuntimeError):
            learner.step(rng)

    def test_setting_violations_rejected(self):
        learner = OnlineRank(single_config())
        with pytest.raises(ValueError):
            learner.update([1, 1, 0])
        with pytest.raises(ValueError):
            learner.update([1, 0])

    def test_mw_posterior_equivalence(self):
        """Each pair's ordering marginal equals a two-action multiplicative
        weights posterior over the cumulative one-sided gains."""
        rng = np.random.default_rng(4)
        eta = 0.2
        n = 5
        learner = OnlineRank(LearnerConfig(n=n, T=100, setting=Setting("general"), eta=eta))
        history = rng.integers(0, 2, size=(40, n)).astype(float)
        for s in history:
            learner.update(s)
        for u, v in itertools.combinations(range(n), 2):
            loss_uv = np.maximum(history[:, v] - history[:, u], 0).sum()
            loss_vu = np.maximum(history[:, u] - history[:, v], 0).sum()
            posterior = math.exp(-eta * loss_uv) / (
                math.exp(-eta * loss_uv) + math.exp(-eta * loss_vu)
            )
            assert pairwise_marginal(learner.weights, u, v) == pytest.approx(
                posterior, rel=1e-12
            )


class TestFplConfig:
    def test_k_choice_constants(self):
        # diameter n^2, loss bound k*n, feedback bound k
        n, k, T = 10, 3, 2000
        config = FplConfig.for_setting(Setting("k-choice", k=k), n, T)
        eps = math.sqrt(n**2 / (k * n * k * T))
        assert config.scale == pytest.approx(1.0 / eps)

    def test_single_choice_is_k_equals_one(self):
        n, T = 10, 500
        a = FplConfig.for_setting(Setting("single"), n, T)
        eps = math.sqrt(n**2 / (1 * n * 1 * T))
        assert a.scale == pytest.approx(1.0 / eps)

    def test_spearman_constants(self):
        n, T = 5, 200
        config = FplConfig.for_setting(Setting("spearman"), n, T)
        eps = math.sqrt(n**2 / (n**3 * n**2 * T))
        assert config.scale == pytest.approx(1.0 / eps)

    def test_negative_scale_rejected(self):
        with pytest.raises(ValueError):
            FplConfig(scale=-1.0)


class TestFpl:
    def test_zero_scale_follows_leader_deterministically(self):
        learner = Fpl(4, Setting("single"), FplConfig(scale=0.0))
        learner.update([0, 0, 1, 0])
        learner.update([0, 0, 1, 0])
        learner.update([1, 0, 0, 0])
        rng = RngStream(2, 0).generator()
        # counts (1, 0, 2, 0): item 2 first, ties by index
        assert learner.step(rng).order().tolist() == [2, 0, 1, 3]

    def test_equal_counts_uniform(self):
        n, m = 3, 100_000
        learner = Fpl(n, Setting("single"), FplConfig(scale=1.0))
        rng = RngStream(3, 0).generator()
        positions = np.array([learner.step(rng).positions for _ in range(m)])
        counts = ranking_histogram(positions, n)
        probs = np.full(6, 1 / 6)
        assert goodness_of_fit_pvalue(counts, probs) > 0.001

    def test_counts_accumulate(self):
        learner = Fpl(3, Setting("single"), FplConfig(scale=5.0))
        for _ in range(7):
            learner.update([0, 1, 0])
        assert learner.counts.tolist() == [0, 7, 0]
        assert learner.t == 7


class TestExplicitMw:
    def test_size_limit_and_beta_validation(self):
        with pytest.raises(ValueError):
            ExplicitMw(9, Setting("single"), beta=0.1)
        with pytest.raises(ValueError):
            ExplicitMw(3, Setting("single"), beta=0.0)

    def test_initial_distribution_uniform(self):
        mw = ExplicitMw(3, Setting("single"), beta=0.3)
        assert np.allclose(mw.distribution(), np.full(6, 1 / 6))

    def test_losses_match_pairwise_loss_oracle(self):
        rng = np.random.default_rng(5)
        mw = ExplicitMw(4, Setting("general"), beta=0.2)
        history = rng.integers(0, 2, size=(10, 4)).astype(float)
        for s in history:
            mw.update(s)
        for ranking, loss in zip(mw.rankings, mw.losses):
            expected = sum(pairwise_loss(ranking, s) for s in history)
            assert loss == pytest.approx(expected, abs=1e-12)

    def test_one_step_distribution(self):
        beta = 0.7
        mw = ExplicitMw(3, Setting("single"), beta=beta)
        mw.update([1, 0, 0])
        # loss of a ranking equals (position of item 0) - 1
        weights = np.array(
            [math.exp(-beta * (r.positions[0] - 1)) for r in mw.rankings]
        )
        assert np.allclose(mw.distribution(), weights / weights.sum())

    def test_large_beta_concentrates_on_leader(self):
        mw = ExplicitMw(3, Setting("single"), beta=50.0)
        for _ in range(3):
            mw.update([0, 1, 0])
        rng = RngStream(4, 0).generator()
        for _ in range(20):
            assert mw.step(rng).positions[1] == 1

    def test_uniform_sampling_at_start(self):
        mw = ExplicitMw(3, Setting("single"), beta=0.5)
        rng = RngStream(5, 0).generator()
        positions = np.array([mw.step(rng).positions for _ in range(30_000)])
        counts = ranking_histogram(positions, 3)
        assert goodness_of_fit_pvalue(counts, np.full(6, 1 / 6)) > 0.001


class TestMakeLearner:
    def test_ids(self):
        setting = Setting("single")
        assert isinstance(make_learner("online-rank", 5, 100, setting), OnlineRank)
        assert isinstance(make_learner("fpl", 5, 100, setting), Fpl)
        assert isinstance(make_learner("mw-explicit", 5, 100, setting), ExplicitMw)
        with pytest.raises(ValueError):
            make_learner("gradient-descent", 5, 100, setting)

    def test_auto_eta(self):
        learner = make_learner("online-rank", 10, 2000, Setting("single"))
        assert learner.config.eta == pytest.approx(learning_rate(10, 2000, 10))

    def test_mw_default_beta_matches_tuned_rate(self):
        mw = make_learner("mw-explicit", 5, 100, Setting("single"))
        assert mw.beta == pytest.approx(learning_rate(5, 100, 5))
