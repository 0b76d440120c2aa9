"""Rankings, choice feedback, and the two loss functions they induce.

A ranking over n items assigns each item a position in 1..n (lower is
better).  Feedback arrives as a per-item score vector s: a 0/1 indicator of
the chosen items in the discrete-choice settings, or an arbitrary real
vector (a negated permutation in Spearman mode).  Two losses are defined:

* position loss  ``l(pi, s)  = sum_u pi(u) * s(u)``
* pairwise loss  ``ll(pi, s) = sum_{u != v} 1[u before v] * max(s(v) - s(u), 0)``

For any fixed s the two differ by a constant independent of pi, so regret
statements are interchangeable between them; all regret accounting in this
package uses the pairwise loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SETTING_KINDS",
    "Ranking",
    "Feedback",
    "Setting",
    "rank_by_scores",
    "position_loss",
    "pairwise_loss",
    "pairwise_loss_term",
    "feedback_complexity",
    "complexity_bound",
]

SETTING_KINDS = ("single", "k-choice", "general", "spearman")

FEEDBACK_KINDS = ("single-choice", "k-choice", "general-binary", "real-valued")


@dataclass(frozen=True)
class Ranking:
    """A bijection from items 0..n-1 onto positions 1..n.

    ``positions[u]`` is the position of item u; position 1 is the most
    favorable.  Instances are immutable and validated on construction.
    """

    positions: np.ndarray

    def __post_init__(self):
        pos = np.array(self.positions, dtype=np.int64, copy=True)
        n = pos.size
        if n > 0:
            if pos.min() < 1 or pos.max() > n or np.unique(pos).size != n:
                raise ValueError("positions must be a bijection onto 1..n")
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)

    @classmethod
    def from_order(cls, order) -> "Ranking":
        """Build a ranking from items listed best-to-worst."""
        order = np.asarray(order, dtype=np.int64)
        positions = np.empty(order.size, dtype=np.int64)
        positions[order] = np.arange(1, order.size + 1)
        return cls(positions)

    @classmethod
    def identity(cls, n: int) -> "Ranking":
        return cls(np.arange(1, n + 1))

    @property
    def n(self) -> int:
        return self.positions.size

    def order(self) -> np.ndarray:
        """Items listed by position, best first."""
        return np.argsort(self.positions, kind="stable")

    def beats(self, u: int, v: int) -> bool:
        """True if u is ranked before (better than) v."""
        return bool(self.positions[u] < self.positions[v])

    def __eq__(self, other) -> bool:
        return isinstance(other, Ranking) and np.array_equal(
            self.positions, other.positions
        )

    def __repr__(self) -> str:
        return f"Ranking(order={self.order().tolist()})"


def rank_by_scores(scores) -> Ranking:
    """Rank items by decreasing score, ties broken by ascending item index.

    This is the deterministic sorting primitive shared by the
    perturbation-based samplers and the hindsight optimum.
    """
    scores = np.asarray(scores, dtype=np.float64)
    order = np.argsort(-scores, kind="stable")
    return Ranking.from_order(order)


@dataclass(frozen=True)
class Feedback:
    """One round of feedback: a length-n score vector plus its declared kind.

    Kinds: ``single-choice`` (exactly one entry 1, rest 0), ``k-choice``
    (1..k ones, k <= n/2), ``general-binary`` (any 0/1 vector), and
    ``real-valued`` (arbitrary reals; Spearman mode stores the negated
    permutation).
    """

    scores: np.ndarray
    kind: str = "general-binary"
    k: int | None = field(default=None)

    def __post_init__(self):
        s = np.array(self.scores, dtype=np.float64, copy=True)
        s.flags.writeable = False
        object.__setattr__(self, "scores", s)
        if self.kind not in FEEDBACK_KINDS:
            raise ValueError(f"unknown feedback kind {self.kind!r}")
        if not np.all(np.isfinite(s)):
            raise ValueError("feedback scores must be finite")
        if self.kind != "real-valued":
            if not np.all((s == 0.0) | (s == 1.0)):
                raise ValueError(f"{self.kind} feedback must be 0/1")
            ones = int(np.count_nonzero(s))
            if self.kind == "single-choice" and ones != 1:
                raise ValueError("single-choice feedback needs exactly one chosen item")
            if self.kind == "k-choice":
                if self.k is None:
                    raise ValueError("k-choice feedback needs k")
                if not 1 <= ones <= self.k:
                    raise ValueError(
                        f"k-choice feedback needs between 1 and {self.k} chosen items, got {ones}"
                    )
                if self.k > s.size / 2:
                    raise ValueError("k must satisfy k <= n/2")

    @property
    def n(self) -> int:
        return self.scores.size

    @classmethod
    def single_choice(cls, n: int, item: int) -> "Feedback":
        s = np.zeros(n)
        s[item] = 1.0
        return cls(s, "single-choice")

    @classmethod
    def chosen_set(cls, n: int, items, k: int) -> "Feedback":
        s = np.zeros(n)
        s[np.asarray(items, dtype=np.int64)] = 1.0
        return cls(s, "k-choice", k=k)

    @classmethod
    def from_permutation(cls, sigma: Ranking) -> "Feedback":
        """Spearman-mode feedback: s = -sigma, so the position loss is
        exactly the negated Spearman correlation with sigma."""
        return cls(-sigma.positions.astype(np.float64), "real-valued")


@dataclass(frozen=True)
class Setting:
    """Which feedback regime a run is played under.

    ``kind`` is one of ``single``, ``k-choice``, ``general``, ``spearman``;
    ``k`` is required for (and only for) k-choice.
    """

    kind: str
    k: int | None = None

    def __post_init__(self):
        if self.kind not in SETTING_KINDS:
            raise ValueError(f"unknown setting kind {self.kind!r}")
        if self.kind == "k-choice":
            if self.k is None or self.k < 1:
                raise ValueError("k-choice setting needs k >= 1")
        elif self.k is not None:
            raise ValueError(f"k is only meaningful for k-choice, not {self.kind}")

    @property
    def feedback_kind(self) -> str:
        return {
            "single": "single-choice",
            "k-choice": "k-choice",
            "general": "general-binary",
            "spearman": "real-valued",
        }[self.kind]

    def validate_scores(self, scores) -> None:
        """Raise ValueError unless a score vector conforms to this setting."""
        s = np.asarray(scores, dtype=np.float64)
        if self.kind == "spearman":
            # Spearman mode plays s = -sigma for a permutation sigma.
            neg = np.sort(-s)
            if not np.array_equal(neg, np.arange(1, s.size + 1)):
                raise ValueError(
                    "spearman feedback must be the negation of a permutation of 1..n"
                )
            return
        Feedback(s, self.feedback_kind, k=self.k)


def complexity_bound(setting: Setting, n: int) -> float:
    """Upper bound M on the per-round pairwise loss for a setting.

    single -> n, k-choice -> n*k, general -> n^2/4, spearman -> n^4.
    The spearman bound is a convenient member of the Theta(n^4) class; the
    exact per-round maximum for permutation feedback is available via
    :func:`feedback_complexity`.
    """
    if setting.kind == "single":
        return float(n)
    if setting.kind == "k-choice":
        if setting.k > n / 2:
            raise ValueError(f"k={setting.k} violates k <= n/2 for n={n}")
        return float(n * setting.k)
    if setting.kind == "general":
        return n * n / 4.0
    return float(n) ** 4


def _check_lengths(ranking: Ranking, scores: np.ndarray) -> None:
    if ranking.n != scores.size:
        raise ValueError(
            f"ranking over {ranking.n} items but feedback has {scores.size} entries"
        )


def position_loss(ranking: Ranking, scores) -> float:
    """Dot product of the (1-indexed) position vector with the scores."""
    s = np.asarray(scores, dtype=np.float64)
    _check_lengths(ranking, s)
    return float(ranking.positions @ s)


def pairwise_loss(ranking: Ranking, scores) -> float:
    """Sum over ordered pairs (u, v) with u before v of max(s(v) - s(u), 0).

    For 0/1 scores this counts pairs where an unchosen item is ranked ahead
    of a chosen one.  Differs from :func:`position_loss` by a constant that
    depends on the scores only, never on the ranking.
    """
    s = np.asarray(scores, dtype=np.float64)
    _check_lengths(ranking, s)
    if s.size < 2:
        return 0.0
    if np.all((s == 0.0) | (s == 1.0)):
        # Each chosen item at position p is preceded by p - 1 items, of
        # which its rank among the chosen accounts for the chosen ones.
        chosen_pos = np.sort(ranking.positions[s == 1.0])
        if chosen_pos.size == 0:
            return 0.0
        return float(np.sum(chosen_pos - 1 - np.arange(chosen_pos.size)))
    pos = ranking.positions
    before = pos[:, None] < pos[None, :]
    gain = np.maximum(s[None, :] - s[:, None], 0.0)
    return float(np.sum(before * gain))


def pairwise_loss_term(ranking: Ranking, scores, u: int, v: int) -> float:
    """Contribution of the unordered pair {u, v} to the pairwise loss.

    Symmetric in (u, v); summing over all unordered pairs reproduces
    :func:`pairwise_loss` exactly.
    """
    if u == v:
        raise ValueError("pair must consist of two distinct items")
    s = np.asarray(scores, dtype=np.float64)
    _check_lengths(ranking, s)
    if ranking.beats(u, v):
        return float(max(s[v] - s[u], 0.0))
    return float(max(s[u] - s[v], 0.0))


def feedback_complexity(scores) -> float:
    """Sum over unordered pairs of (s(v) - s(u))^2.

    For 0/1 scores this equals the largest pairwise loss any ranking can
    incur on s; the per-setting M of :func:`complexity_bound` upper-bounds
    it.
    """
    s = np.asarray(scores, dtype=np.float64)
    diffs = s[None, :] - s[:, None]
    return float(np.sum(np.triu(diffs * diffs, k=1)))
