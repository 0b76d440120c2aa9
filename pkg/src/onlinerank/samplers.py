"""Randomized sorting procedures: weight vector in, random ranking out.

All three samplers share one marginal property: for any pair of distinct
items u, v the probability that u is ranked before v equals

    e^{w(u)} / (e^{w(u)} + e^{w(v)})

i.e. each pair plays a two-action multiplicative-weights posterior over its
two orderings.  The noisy quicksort is only guaranteed to match the
Plackett-Luce samplers pairwise, not in full distribution over rankings.

Weights live on the natural-log scale (item u has score e^{w(u)}), and all
probability arithmetic is done in stable logistic / log-domain form so that
weights of magnitude hundreds (eta * T accumulations) never overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Ranking, rank_by_scores

__all__ = [
    "RngStream",
    "quicksort_sample",
    "plackett_luce_sample",
    "plackett_luce_gumbel",
    "pairwise_marginal",
    "sample_positions",
    "plackett_luce_log_prob",
    "SAMPLERS",
]


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by (seed, stream id).

    Backed by numpy's counter-based Philox bit generator with the pair as
    its 128-bit key, so identical (seed, stream) pairs replay identical
    draw sequences on any platform for a pinned numpy version.  Distinct
    stream ids are independent and safe to consume concurrently.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.seed % (1 << 64), self.stream % (1 << 64)], dtype=np.uint64
        )
        return np.random.Generator(np.random.Philox(key=key))


def _as_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1:
        raise ValueError("weights must be one-dimensional")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    return w


def _sigmoid(x: np.ndarray) -> np.ndarray:
    """1 / (1 + e^{-x}) without overflow for any finite x."""
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def pairwise_marginal(weights, u: int, v: int) -> float:
    """Probability that item u is ranked before item v.

    Evaluates e^{w(u)} / (e^{w(u)} + e^{w(v)}) in the stable form
    1 / (1 + e^{w(v) - w(u)}); depends on the weight difference only.
    """
    if u == v:
        raise ValueError("pair must consist of two distinct items")
    w = _as_weights(weights)
    d = w[u] - w[v]
    return float(_sigmoid(np.array([d]))[0])


def _quicksort_orders_batch(w: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """m independent noisy-quicksort draws, processed level-synchronously.

    All segments still being sorted (across every draw) pick their pivots
    and partition in one vectorized pass per recursion level: within each
    segment a uniform pivot p is placed, and every other item v goes to the
    left (better) side independently with probability
    e^{w(v)} / (e^{w(v)} + e^{w(p)}).  Iterative by construction, so the
    worst-case recursion depth n of adversarially skewed weights costs
    levels, not call-stack frames.
    """
    n = w.size
    out = np.empty(m * n, dtype=np.int64)
    if n == 0:
        return out.reshape(m, 0)
    work = np.tile(np.arange(n), m)  # item ids, grouped by segment
    seg_len = np.full(m, n, dtype=np.int64)
    seg_base = np.arange(m, dtype=np.int64) * n  # output slot of each segment
    while seg_len.size:
        S = seg_len.size
        wstart = np.concatenate(([0], np.cumsum(seg_len[:-1])))
        pivot_pos = wstart + rng.integers(0, seg_len)
        pivot_item = work[pivot_pos]
        elem_seg = np.repeat(np.arange(S), seg_len)
        # One uniform per element; the pivots' own draws go unused.
        go_left = rng.random(work.size) < _sigmoid(w[work] - w[pivot_item][elem_seg])
        is_pivot = np.zeros(work.size, dtype=bool)
        is_pivot[pivot_pos] = True
        n_left = np.bincount(elem_seg[go_left & ~is_pivot], minlength=S)
        out[seg_base + n_left] = pivot_item
        keep = ~is_pivot
        # Stable sort by (segment, side) lays the surviving items out in
        # exactly the child-segment order built below.
        child_key = elem_seg * 2 + (~go_left)
        work = work[keep][np.argsort(child_key[keep], kind="stable")]
        child_len = np.empty(2 * S, dtype=np.int64)
        child_len[0::2] = n_left
        child_len[1::2] = seg_len - 1 - n_left
        child_base = np.empty(2 * S, dtype=np.int64)
        child_base[0::2] = seg_base
        child_base[1::2] = seg_base + n_left + 1
        live = child_len > 0
        seg_len = child_len[live]
        seg_base = child_base[live]
    return out.reshape(m, n)


def quicksort_sample(weights, rng: np.random.Generator) -> Ranking:
    """Noisy quicksort: random pivot, logistic left/right splits, recurse.

    A pivot p is chosen uniformly; every other item v independently goes to
    the left (better) side with probability e^{w(v)} / (e^{w(v)} + e^{w(p)})
    and to the right otherwise, and both sides are sorted recursively.
    Expected time O(n log n); the iterative engine tolerates worst-case
    partition depth n.
    """
    w = _as_weights(weights)
    return Ranking.from_order(_quicksort_orders_batch(w, 1, rng)[0])


def plackett_luce_sample(weights, rng: np.random.Generator) -> Ranking:
    """Sequential Plackett-Luce draw, the O(n^2) reference implementation.

    Fills positions 1..n in order, choosing each next item from the
    remaining pool with probability proportional to e^{w(u)}.
    """
    w = _as_weights(weights)
    n = w.size
    pool = np.arange(n)
    order = np.empty(n, dtype=np.int64)
    for i in range(n):
        z = np.exp(w[pool] - w[pool].max())
        c = np.cumsum(z)
        j = int(np.searchsorted(c, rng.random() * c[-1], side="right"))
        j = min(j, pool.size - 1)
        order[i] = pool[j]
        pool = np.delete(pool, j)
    return Ranking.from_order(order)


def _gumbel(rng: np.random.Generator, size) -> np.ndarray:
    # Inverse CDF of F(x) = exp(-exp(-x)); the uniform is nudged off 0 so
    # the result is always finite.
    u = rng.random(size)
    u[u == 0.0] = np.finfo(np.float64).tiny
    return -np.log(-np.log(u))


def plackett_luce_gumbel(weights, rng: np.random.Generator) -> Ranking:
    """Plackett-Luce sampling via Gumbel perturbation, in O(n log n).

    Adds an independent standard-Gumbel variate to each weight and sorts
    the perturbed scores in decreasing order; the resulting distribution
    over rankings is identical to :func:`plackett_luce_sample`.  Floating-
    point ties are broken by ascending item index.  This is the production
    sampler for large n.
    """
    w = _as_weights(weights)
    return rank_by_scores(w + _gumbel(rng, w.size))


def _positions_from_orders(orders: np.ndarray) -> np.ndarray:
    m, n = orders.shape
    positions = np.empty_like(orders)
    rows = np.arange(m)[:, None]
    positions[rows, orders] = np.arange(1, n + 1)[None, :]
    return positions


def _gumbel_positions_batch(w, m, rng):
    scores = w[None, :] + _gumbel(rng, (m, w.size))
    # Stable argsort of the negated scores breaks ties by ascending index,
    # matching the single-draw path.
    orders = np.argsort(-scores, axis=1, kind="stable")
    return _positions_from_orders(orders)


def _plackett_luce_positions_batch(w, m, rng):
    n = w.size
    live = np.tile(w[None, :], (m, 1))
    orders = np.empty((m, n), dtype=np.int64)
    rows = np.arange(m)
    for i in range(n):
        z = np.exp(live - live.max(axis=1, keepdims=True))
        c = np.cumsum(z, axis=1)
        total = c[:, -1]
        # Keep u strictly below the total so the inverse CDF always lands
        # on a still-unplaced column even if the product rounds up.
        u = np.minimum(rng.random(m) * total, np.nextafter(total, -np.inf))
        picked = (c <= u[:, None]).sum(axis=1)
        orders[:, i] = picked
        live[rows, picked] = -np.inf
    return _positions_from_orders(orders)


def sample_positions(
    sampler, weights, m: int, rng: np.random.Generator, chunk: int = 100_000
) -> np.ndarray:
    """Draw m rankings and return their position vectors as an (m, n) array.

    ``sampler`` is a name from :data:`SAMPLERS` or one of the sampler
    functions.  The Plackett-Luce variants are vectorized across draws;
    quicksort draws are looped.  Intended for Monte Carlo verification.
    """
    w = _as_weights(weights)
    name = sampler if isinstance(sampler, str) else _SAMPLER_NAMES.get(sampler)
    if name not in SAMPLERS:
        raise ValueError(f"unknown sampler {sampler!r}")
    if name == "quicksort":
        batch = lambda w, m, rng: _positions_from_orders(_quicksort_orders_batch(w, m, rng))
    elif name == "pl-gumbel":
        batch = _gumbel_positions_batch
    else:
        batch = _plackett_luce_positions_batch
    parts = []
    done = 0
    while done < m:
        take = min(chunk, m - done)
        parts.append(batch(w, take, rng))
        done += take
    return parts[0] if len(parts) == 1 else np.concatenate(parts, axis=0)


def plackett_luce_log_prob(weights, ranking: Ranking) -> float:
    """Exact log-probability of a ranking under the Plackett-Luce model.

    Chain rule over positions: at each step the placed item competes
    against everything still unplaced.  Computed with log-sum-exp.
    """
    w = _as_weights(weights)
    order = ranking.order()
    logp = 0.0
    for i in range(order.size):
        tail = w[order[i:]]
        hi = tail.max()
        logp += w[order[i]] - (hi + np.log(np.sum(np.exp(tail - hi))))
    return float(logp)


SAMPLERS = {
    "quicksort": quicksort_sample,
    "pl": plackett_luce_sample,
    "pl-gumbel": plackett_luce_gumbel,
}

_SAMPLER_NAMES = {fn: name for name, fn in SAMPLERS.items()}
