"""Feedback-sequence generators (oblivious adversaries) and trace files.

Sequences are fixed before play begins, are immutable afterwards, and are
reproducible bit-exactly from (generator, parameters, seed).  The trace
format is line-oriented text: one round per line, ``#`` starts a comment,
choice rounds list 0-based item indices, Spearman rounds list all items in
position order (first listed item ranked first).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Ranking, Setting

__all__ = [
    "FeedbackSequence",
    "TraceError",
    "uniform_single_choice",
    "uniform_k_choice",
    "spearman_sequence",
    "load_trace",
    "save_trace",
]


class TraceError(ValueError):
    """Trace file violates the format or the declared setting."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def _validate_matrix(setting: Setting, scores: np.ndarray) -> None:
    if scores.size == 0:
        return
    if setting.kind == "spearman":
        expected = np.arange(1, scores.shape[1] + 1)
        if not np.array_equal(np.sort(-scores, axis=1), np.tile(expected, (scores.shape[0], 1))):
            raise ValueError("spearman rows must each be a negated permutation of 1..n")
        return
    if not np.all((scores == 0.0) | (scores == 1.0)):
        raise ValueError(f"{setting.kind} rows must be 0/1")
    ones = np.count_nonzero(scores, axis=1)
    if setting.kind == "single" and not np.all(ones == 1):
        raise ValueError("single-choice rows need exactly one chosen item")
    if setting.kind == "k-choice" and not np.all((ones >= 1) & (ones <= setting.k)):
        raise ValueError(f"k-choice rows need between 1 and {setting.k} chosen items")


@dataclass(frozen=True)
class FeedbackSequence:
    """T rounds of feedback conforming to one setting, as a (T, n) matrix."""

    scores: np.ndarray
    setting: Setting
    provenance: str = ""

    def __post_init__(self):
        s = np.array(self.scores, dtype=np.float64, copy=True)
        if s.ndim != 2:
            raise ValueError("scores must be a (T, n) matrix")
        _validate_matrix(self.setting, s)
        s.flags.writeable = False
        object.__setattr__(self, "scores", s)

    @property
    def T(self) -> int:
        return self.scores.shape[0]

    @property
    def n(self) -> int:
        return self.scores.shape[1]

    def __len__(self) -> int:
        return self.T

    def prefix(self, t: int) -> "FeedbackSequence":
        return FeedbackSequence(self.scores[:t], self.setting, self.provenance)


def uniform_single_choice(
    n: int, T: int, rng: np.random.Generator, provenance: str = "uniform-single"
) -> FeedbackSequence:
    """One uniformly random chosen item per round.

    Per-item frequencies are Binomial(T, 1/n); this is the hardest known
    stochastic opponent for the single-choice game.
    """
    if n < 2:
        raise ValueError("need at least two items")
    scores = np.zeros((T, n))
    scores[np.arange(T), rng.integers(0, n, size=T)] = 1.0
    return FeedbackSequence(scores, Setting("single"), provenance)


def uniform_k_choice(
    n: int, k: int, T: int, rng: np.random.Generator, provenance: str = "uniform-k"
) -> FeedbackSequence:
    """A uniformly random size-k subset per round (k <= n/2)."""
    if not 1 <= k <= n / 2:
        raise ValueError(f"k must be in [1, n/2], got k={k}, n={n}")
    # Row-wise argsort of iid uniforms is a uniform permutation; its first
    # k entries are a uniform k-subset.
    picks = np.argsort(rng.random((T, n)), axis=1)[:, :k]
    scores = np.zeros((T, n))
    scores[np.arange(T)[:, None], picks] = 1.0
    return FeedbackSequence(scores, Setting("k-choice", k=k), provenance)


def spearman_sequence(
    n: int,
    T: int,
    mode: str = "uniform-random",
    rng: np.random.Generator | None = None,
    fixed: Ranking | None = None,
    provenance: str = "spearman",
) -> FeedbackSequence:
    """Rank-aggregation feedback: s_t = -sigma_t for permutations sigma_t.

    Modes: ``uniform-random`` draws a fresh uniform permutation each round;
    ``fixed`` repeats one permutation (identity unless given).
    """
    if mode == "uniform-random":
        if rng is None:
            raise ValueError("uniform-random mode needs an rng")
        orders = np.argsort(rng.random((T, n)), axis=1)
        positions = np.empty((T, n), dtype=np.int64)
        positions[np.arange(T)[:, None], orders] = np.arange(1, n + 1)[None, :]
        scores = -positions.astype(np.float64)
    elif mode == "fixed":
        sigma = fixed if fixed is not None else Ranking.identity(n)
        if sigma.n != n:
            raise ValueError("fixed permutation has the wrong size")
        scores = np.tile(-sigma.positions.astype(np.float64), (T, 1))
    else:
        raise ValueError(f"unknown spearman mode {mode!r}")
    return FeedbackSequence(scores, Setting("spearman"), provenance)


def load_trace(path, setting: Setting, n: int) -> FeedbackSequence:
    """Read a feedback sequence from a trace file, validating every round.

    Raises :class:`TraceError` (with the offending line number) on
    malformed lines, out-of-range item ids, duplicates, or cardinality
    violations.  An empty file yields an accepted zero-round sequence.
    """
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            try:
                items = [int(tok) for tok in text.split()]
            except ValueError:
                raise TraceError(f"cannot parse {text!r} as item indices", lineno) from None
            if any(i < 0 or i >= n for i in items):
                raise TraceError(f"item index out of range 0..{n - 1}", lineno)
            if len(set(items)) != len(items):
                raise TraceError("duplicate item in round", lineno)
            if setting.kind == "spearman":
                if len(items) != n:
                    raise TraceError(
                        f"spearman round must list all {n} items in position order",
                        lineno,
                    )
                positions = np.empty(n)
                positions[items] = np.arange(1, n + 1)
                rows.append(-positions)
            else:
                if setting.kind == "single" and len(items) != 1:
                    raise TraceError("single-choice round must list exactly one item", lineno)
                if setting.kind == "k-choice" and not 1 <= len(items) <= setting.k:
                    raise TraceError(
                        f"k-choice round must list between 1 and {setting.k} items",
                        lineno,
                    )
                if len(items) == 0:
                    raise TraceError("round lists no items", lineno)
                s = np.zeros(n)
                s[items] = 1.0
                rows.append(s)
    scores = np.array(rows) if rows else np.zeros((0, n))
    return FeedbackSequence(scores, setting, provenance=f"trace:{path}")


def save_trace(seq: FeedbackSequence, path, header: str | None = None) -> None:
    """Write a sequence in the trace format; round-trips bit-exactly."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for row in seq.scores:
            if seq.setting.kind == "spearman":
                order = np.argsort(-row, kind="stable")
                fh.write(" ".join(str(int(i)) for i in order) + "\n")
            else:
                items = np.flatnonzero(row == 1.0)
                fh.write(" ".join(str(int(i)) for i in items) + "\n")
