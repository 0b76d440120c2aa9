"""Online learners: one ranking out per round, one feedback vector in.

The main learner keeps a cumulative, learning-rate-scaled weight per item
and hands the weight vector to a randomized sorting procedure each round.
Two baselines are provided: follow-the-perturbed-leader over cumulative
counts, and an explicit multiplicative-weights scheme that enumerates all
n! rankings (tiny n only).
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import Ranking, Setting, complexity_bound, rank_by_scores
from .samplers import SAMPLERS

__all__ = [
    "learning_rate",
    "LearnerConfig",
    "OnlineRank",
    "FplConfig",
    "Fpl",
    "ExplicitMw",
    "make_learner",
]


def learning_rate(n: int, T: int, M: float) -> float:
    """The tuned learning rate n * sqrt(log 2) / sqrt(T * M).

    Guaranteed to be at most 1 whenever T >= n^2 log(2) / M; outside that
    horizon a warning is emitted (short-horizon probes are legitimate
    experiments) but the formula value is still returned.
    """
    if T <= 0 or M <= 0:
        raise ValueError("T and M must be positive")
    if T < n * n * math.log(2) / M:
        warnings.warn(
            f"horizon T={T} is below n^2 log(2)/M = {n * n * math.log(2) / M:.3g}; "
            "the tuned learning rate exceeds 1 and the regret guarantee "
            "does not apply",
            RuntimeWarning,
            stacklevel=2,
        )
    return n * math.sqrt(math.log(2)) / math.sqrt(T * M)


@dataclass(frozen=True)
class LearnerConfig:
    """Shared knobs: ground-set size, horizon, setting, rate, sampler."""

    n: int
    T: int
    setting: Setting
    eta: float
    sampler: str = "pl-gumbel"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two items")
        if self.T < 1:
            raise ValueError("horizon must be at least one round")
        if self.eta <= 0:
            raise ValueError("learning rate must be positive")
        if self.eta > 1:
            warnings.warn(
                f"eta={self.eta:.4g} exceeds 1; the regret guarantee assumes "
                "eta <= 1",
                RuntimeWarning,
                stacklevel=2,
            )
        if self.sampler not in SAMPLERS:
            raise ValueError(f"unknown sampler {self.sampler!r}")

    @classmethod
    def auto(cls, n: int, T: int, setting: Setting, sampler: str = "pl-gumbel"):
        """Config with the tuned rate for the setting's complexity bound."""
        M = complexity_bound(setting, n)
        return cls(n=n, T=T, setting=setting, eta=learning_rate(n, T, M), sampler=sampler)


class OnlineRank:
    """Cumulative-weight learner driven by a randomized sorting procedure.

    Each round it samples a ranking from the current weights, then adds
    eta * s_t to the weights after feedback s_t arrives.  Weights are kept
    as raw feedback totals and scaled by eta on read, so after any number
    of identical updates the weight equals eta times the exact total.
    """

    def __init__(self, config: LearnerConfig):
        self.config = config
        self._sampler = SAMPLERS[config.sampler]
        self._totals = np.zeros(config.n)
        self.t = 0

    @property
    def weights(self) -> np.ndarray:
        return self.config.eta * self._totals

    def step(self, rng: np.random.Generator) -> Ranking:
        """Sample this round's ranking.  Read-only: never mutates state."""
        if self.t >= self.config.T:
            raise RuntimeError(f"horizon of {self.config.T} rounds exhausted")
        return self._sampler(self.weights, rng)

    def update(self, scores) -> None:
        """Absorb one round of feedback (must conform to the setting)."""
        s = np.asarray(scores, dtype=np.float64)
        if s.size != self.config.n:
            raise ValueError(f"expected {self.config.n} scores, got {s.size}")
        self.config.setting.validate_scores(s)
        self._totals += s
        self.t += 1


@dataclass(frozen=True)
class FplConfig:
    """Follow-the-perturbed-leader parameters.

    The shape parameter eps = sqrt(diameter / (loss_bound * feedback_bound
    * T)) controls a uniform perturbation on [0, 1/eps].  Per-setting
    defaults: diameter n^2 always; loss bound k*n and feedback bound k in
    the choice settings (k = 1 for single choice, k = n/2 in the general
    binary case); n^3 and n^2 in Spearman mode.
    """

    scale: float  # width of the uniform perturbation interval, 1/eps

    def __post_init__(self):
        if self.scale < 0:
            raise ValueError("perturbation scale must be nonnegative")

    @classmethod
    def for_setting(cls, setting: Setting, n: int, T: int) -> "FplConfig":
        if setting.kind == "spearman":
            diameter, loss_bound, feedback_bound = n**2, n**3, n**2
        else:
            k = {"single": 1, "k-choice": setting.k, "general": n // 2}[setting.kind]
            diameter, loss_bound, feedback_bound = n**2, k * n, k
        eps = math.sqrt(diameter / (loss_bound * feedback_bound * T))
        return cls(scale=1.0 / eps)


class Fpl:
    """Follow the perturbed leader over cumulative per-item feedback.

    Ranks items by cumulative score plus a fresh i.i.d. uniform
    perturbation on [0, scale] each round, ties broken by ascending item
    index.  Zero scale degenerates to deterministically following the
    leader.
    """

    def __init__(self, n: int, setting: Setting, config: FplConfig):
        self.n = n
        self.setting = setting
        self.config = config
        self.counts = np.zeros(n)
        self.t = 0

    def step(self, rng: np.random.Generator) -> Ranking:
        perturbation = rng.random(self.n) * self.config.scale
        return rank_by_scores(self.counts + perturbation)

    def update(self, scores) -> None:
        s = np.asarray(scores, dtype=np.float64)
        if s.size != self.n:
            raise ValueError(f"expected {self.n} scores, got {s.size}")
        self.setting.validate_scores(s)
        self.counts += s
        self.t += 1


class ExplicitMw:
    """Multiplicative weights over all n! rankings, by brute enumeration.

    Keeps the cumulative pairwise loss of every ranking and samples one
    with probability proportional to exp(-beta * loss).  Exact but
    factorial: restricted to n <= 8.
    """

    MAX_N = 8

    def __init__(self, n: int, setting: Setting, beta: float):
        if n > self.MAX_N:
            raise ValueError(f"explicit enumeration is limited to n <= {self.MAX_N}")
        if beta <= 0:
            raise ValueError("beta must be positive")
        self.n = n
        self.setting = setting
        self.beta = beta
        self.rankings = [
            Ranking.from_order(order) for order in itertools.permutations(range(n))
        ]
        self._positions = np.array([r.positions for r in self.rankings])
        # Column per ordered pair (u, v): does the ranking put u before v?
        self._pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
        self._before = np.stack(
            [self._positions[:, u] < self._positions[:, v] for u, v in self._pairs],
            axis=1,
        ).astype(np.float64)
        self.losses = np.zeros(len(self.rankings))
        self.t = 0

    def distribution(self) -> np.ndarray:
        logits = -self.beta * (self.losses - self.losses.min())
        p = np.exp(logits)
        return p / p.sum()

    def step(self, rng: np.random.Generator) -> Ranking:
        c = np.cumsum(self.distribution())
        idx = int(np.searchsorted(c, rng.random() * c[-1], side="right"))
        return self.rankings[min(idx, len(self.rankings) - 1)]

    def update(self, scores) -> None:
        s = np.asarray(scores, dtype=np.float64)
        if s.size != self.n:
            raise ValueError(f"expected {self.n} scores, got {s.size}")
        self.setting.validate_scores(s)
        gains = np.array([max(s[v] - s[u], 0.0) for u, v in self._pairs])
        self.losses += self._before @ gains
        self.t += 1


def make_learner(
    learner_id: str,
    n: int,
    T: int,
    setting: Setting,
    eta: float | str = "auto",
    sampler: str = "pl-gumbel",
    fpl_scale: float | str = "auto",
    beta: float | str = "auto",
):
    """Construct a learner by id: online-rank, fpl, or mw-explicit."""
    M = complexity_bound(setting, n)
    eta_value = learning_rate(n, T, M) if eta == "auto" else float(eta)
    if learner_id == "online-rank":
        return OnlineRank(LearnerConfig(n=n, T=T, setting=setting, eta=eta_value, sampler=sampler))
    if learner_id == "fpl":
        config = (
            FplConfig.for_setting(setting, n, T)
            if fpl_scale == "auto"
            else FplConfig(scale=float(fpl_scale))
        )
        return Fpl(n, setting, config)
    if learner_id == "mw-explicit":
        beta_value = eta_value if beta == "auto" else float(beta)
        return ExplicitMw(n, setting, beta_value)
    raise ValueError(f"unknown learner {learner_id!r}")
