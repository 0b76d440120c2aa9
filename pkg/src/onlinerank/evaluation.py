"""Hindsight optima, regret accounting, bound formulas, and the sampling
statistics used to verify the samplers' distributional claims."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .core import Ranking, pairwise_loss, position_loss, rank_by_scores
from .samplers import sample_positions

__all__ = [
    "hindsight_best",
    "total_pairwise_loss",
    "total_position_loss",
    "regret_upper_bound",
    "regret_lower_bound",
    "expected_step_loss_uniform",
    "RunRecord",
    "BoundReport",
    "MarginalCheck",
    "MarginalReport",
    "marginal_test",
    "all_rankings",
    "ranking_histogram",
    "goodness_of_fit_pvalue",
    "homogeneity_pvalue",
]


def hindsight_best(seq) -> Ranking:
    """The best fixed ranking for a whole sequence.

    Sorts items by decreasing cumulative score (ties by ascending index),
    which minimizes the total position loss over the sequence and hence,
    by the constant-offset identity, the total pairwise loss as well.
    """
    if seq.T == 0:
        raise ValueError("cannot take a hindsight optimum of an empty sequence")
    return rank_by_scores(seq.scores.sum(axis=0))


def total_pairwise_loss(ranking: Ranking, seq) -> float:
    return float(sum(pairwise_loss(ranking, row) for row in seq.scores))


def total_position_loss(ranking: Ranking, seq) -> float:
    return float(sum(position_loss(ranking, row) for row in seq.scores))


def regret_upper_bound(n: int, T: int, M: float) -> float:
    """Guaranteed expected-regret ceiling n * sqrt(T * M * log 2) for the
    tuned learning rate."""
    return n * math.sqrt(T * M * math.log(2))


def regret_lower_bound(n: int, T: int, k: int = 1) -> float:
    """Minimax floor 0.003 * n^{3/2} * sqrt(T * k).

    Holds for sufficiently large n and T (thresholds not quantified), so
    it is reported for context and never asserted as a hard test.
    """
    return 0.003 * n**1.5 * math.sqrt(T * k)


def expected_step_loss_uniform(n: int) -> float:
    """Exact expected per-round pairwise loss of ANY algorithm against the
    uniform single-choice adversary: (n - 1) / 2.

    (Equivalently the 0-indexed position loss; with 1-indexed positions
    the constant shifts to (n + 1) / 2.)
    """
    return (n - 1) / 2


@dataclass
class RunRecord:
    """Everything recorded about one seeded run of one learner."""

    seed: int
    eta: float
    step_pairwise: np.ndarray
    step_position: np.ndarray
    cum_pairwise: np.ndarray
    hindsight: Ranking
    hindsight_loss: float
    regret: float
    checkpoints: list[tuple[int, float]] = field(default_factory=list)
    rankings: list[Ranking] | None = None
    config: dict = field(default_factory=dict)


@dataclass
class BoundReport:
    """Empirical regret of a batch of seeded runs next to the theory."""

    upper_bound: float
    lower_bound: float
    mean_regret: float
    stderr: float
    seeds: int

    @classmethod
    def from_regrets(cls, regrets, upper_bound: float, lower_bound: float) -> "BoundReport":
        r = np.asarray(regrets, dtype=np.float64)
        if r.size < 1:
            raise ValueError("need at least one seed")
        stderr = float(r.std(ddof=1) / math.sqrt(r.size)) if r.size > 1 else 0.0
        return cls(
            upper_bound=upper_bound,
            lower_bound=lower_bound,
            mean_regret=float(r.mean()),
            stderr=stderr,
            seeds=int(r.size),
        )


@dataclass(frozen=True)
class MarginalCheck:
    u: int
    v: int
    expected: float
    empirical: float
    z: float
    passed: bool


@dataclass
class MarginalReport:
    checks: list[MarginalCheck]
    samples: int
    z_threshold: float

    @property
    def pass_fraction(self) -> float:
        return sum(c.passed for c in self.checks) / len(self.checks)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


def marginal_test(
    sampler,
    weights,
    pairs,
    m: int,
    rng: np.random.Generator,
    z_threshold: float = 4.0,
) -> MarginalReport:
    """Empirically check the pair-ordering marginals of a sampler.

    Draws m rankings from ``sampler`` at ``weights`` and, for every pair
    (u, v), compares the frequency of u-before-v against the logistic
    prediction e^{w(u)} / (e^{w(u)} + e^{w(v)}), flagging pairs whose
    binomial z-score exceeds the threshold.  Deterministic given the rng.
    """
    if m < 100:
        raise ValueError("need at least 100 samples for a meaningful check")
    from .samplers import pairwise_marginal

    positions = sample_positions(sampler, weights, m, rng)
    checks = []
    for u, v in pairs:
        p = pairwise_marginal(weights, u, v)
        freq = float(np.mean(positions[:, u] < positions[:, v]))
        se = math.sqrt(p * (1.0 - p) / m)
        z = (freq - p) / se if se > 0 else 0.0
        checks.append(
            MarginalCheck(u=u, v=v, expected=p, empirical=freq, z=z, passed=abs(z) <= z_threshold)
        )
    return MarginalReport(checks=checks, samples=m, z_threshold=z_threshold)


def all_rankings(n: int) -> list[Ranking]:
    """Every ranking of n items, in lexicographic order of best-to-worst
    item lists."""
    return [Ranking.from_order(order) for order in itertools.permutations(range(n))]


def ranking_histogram(positions: np.ndarray, n: int) -> np.ndarray:
    """Counts of each of the n! rankings in a batch of position vectors,
    aligned with :func:`all_rankings`."""
    orders = np.argsort(positions, axis=1)
    base = n ** np.arange(n - 1, -1, -1, dtype=np.int64)
    codes = orders @ base
    index = {
        int(np.asarray(order, dtype=np.int64) @ base): i
        for i, order in enumerate(itertools.permutations(range(n)))
    }
    counts = np.zeros(math.factorial(n), dtype=np.int64)
    uniq, cnt = np.unique(codes, return_counts=True)
    for code, c in zip(uniq, cnt):
        counts[index[int(code)]] += c
    return counts


def goodness_of_fit_pvalue(counts: np.ndarray, probs: np.ndarray) -> float:
    """Chi-square p-value of observed ranking counts against exact
    probabilities."""
    m = counts.sum()
    return float(stats.chisquare(counts, f_exp=m * np.asarray(probs)).pvalue)


def homogeneity_pvalue(counts_a: np.ndarray, counts_b: np.ndarray) -> float:
    """Chi-square p-value that two count vectors come from one
    distribution."""
    table = np.stack([counts_a, counts_b])
    # Drop categories unseen in both samples; they carry no information.
    table = table[:, table.sum(axis=0) > 0]
    return float(stats.chi2_contingency(table).pvalue)
