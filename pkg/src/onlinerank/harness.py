"""Experiment configuration, execution, sweeps, and serialized outputs.

All randomness flows through :class:`~onlinerank.samplers.RngStream`
objects derived from config seeds (stream 0 feeds the adversary, stream 1
the learner), so identical configs replay byte-identically.  Result files
carry a schema version; wall-clock timings go to a separate sidecar file
(``timings.txt``) so the CSV/JSON outputs stay deterministic.
"""

from __future__ import annotations

import csv
import itertools
import json
import time
from dataclasses import dataclass, replace

import numpy as np

from .core import Ranking, Setting, complexity_bound, pairwise_loss, position_loss
from .environments import (
    FeedbackSequence,
    load_trace,
    spearman_sequence,
    uniform_k_choice,
    uniform_single_choice,
)
from .evaluation import (
    BoundReport,
    RunRecord,
    hindsight_best,
    regret_lower_bound,
    regret_upper_bound,
    total_pairwise_loss,
)
from .learners import make_learner
from .samplers import RngStream

__all__ = [
    "SCHEMA_VERSION",
    "ADVERSARY_STREAM",
    "LEARNER_STREAM",
    "ExperimentConfig",
    "ConfigError",
    "make_setting",
    "make_sequence",
    "play",
    "run",
    "sweep",
    "write_results_csv",
    "write_summary_json",
    "read_summary",
]

SCHEMA_VERSION = 1

ADVERSARY_STREAM = 0
LEARNER_STREAM = 1

RANKING_STORAGE_LIMIT = 100  # elide per-step rankings above this n

LEARNER_IDS = ("online-rank", "fpl", "mw-explicit")
ADVERSARY_IDS = ("auto", "uniform-single", "uniform-k", "spearman-uniform", "spearman-fixed", "trace")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    setting: str = "single"
    n: int = 10
    k: int | None = None
    T: int = 1000
    learner: str = "online-rank"
    eta: float | str = "auto"
    sampler: str = "pl-gumbel"
    fpl_scale: float | str = "auto"
    beta: float | str = "auto"
    adversary: str = "auto"
    trace: str | None = None
    seeds: tuple[int, ...] = (0,)
    out: str | None = None
    checkpoint_interval: int | None = None
    record_rankings: bool | None = None

    def __post_init__(self):
        if self.T < 1:
            raise ConfigError("T must be at least 1")
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.setting not in ("single", "k-choice", "general", "spearman"):
            raise ConfigError(f"unknown setting {self.setting!r}")
        if self.setting == "k-choice" and (self.k is None or self.k < 1):
            raise ConfigError("k-choice requires k >= 1")
        if self.learner not in LEARNER_IDS:
            raise ConfigError(f"unknown learner {self.learner!r}")
        if self.adversary not in ADVERSARY_IDS:
            raise ConfigError(f"unknown adversary {self.adversary!r}")
        if self.adversary == "trace" and not self.trace:
            raise ConfigError("trace adversary requires a trace path")
        if not self.seeds:
            raise ConfigError("need at least one seed")
        if self.eta != "auto" and float(self.eta) <= 0:
            raise ConfigError("eta must be positive or 'auto'")

    def snapshot(self) -> dict:
        return {
            "setting": self.setting,
            "n": self.n,
            "k": self.k,
            "T": self.T,
            "learner": self.learner,
            "eta": self.eta,
            "sampler": self.sampler,
            "fpl_scale": self.fpl_scale,
            "beta": self.beta,
            "adversary": self.adversary,
            "trace": self.trace,
            "seeds": list(self.seeds),
            "checkpoint_interval": self.checkpoint_interval,
        }


def make_setting(config: ExperimentConfig) -> Setting:
    if config.setting == "k-choice":
        return Setting("k-choice", k=config.k)
    return Setting(config.setting)


def make_sequence(config: ExperimentConfig, seed: int) -> FeedbackSequence:
    """Generate (or load) the feedback sequence for one seeded run."""
    adversary = config.adversary
    if adversary == "auto":
        adversary = {
            "single": "uniform-single",
            "k-choice": "uniform-k",
            "general": "uniform-k",
            "spearman": "spearman-uniform",
        }[config.setting]
    if adversary == "trace":
        seq = load_trace(config.trace, make_setting(config), config.n)
        if seq.T < config.T:
            raise ConfigError(f"trace provides {seq.T} rounds but T={config.T}")
        return seq.prefix(config.T) if seq.T > config.T else seq
    rng = RngStream(seed, ADVERSARY_STREAM).generator()
    tag = f"{adversary}(seed={seed})"
    if adversary == "uniform-single":
        return uniform_single_choice(config.n, config.T, rng, provenance=tag)
    if adversary == "uniform-k":
        k = config.k if config.setting == "k-choice" else max(1, config.n // 2)
        seq = uniform_k_choice(config.n, k, config.T, rng, provenance=tag)
        # A size-k subset is also valid general-binary feedback.
        if config.setting == "general":
            seq = FeedbackSequence(seq.scores, Setting("general"), tag)
        return seq
    if adversary == "spearman-uniform":
        return spearman_sequence(config.n, config.T, "uniform-random", rng, provenance=tag)
    return spearman_sequence(config.n, config.T, "fixed", provenance=tag)


def _learner_rate(learner) -> float:
    if hasattr(learner, "config") and hasattr(learner.config, "eta"):
        return learner.config.eta
    if hasattr(learner, "config") and hasattr(learner.config, "scale"):
        return learner.config.scale
    return learner.beta


def play(
    learner,
    seq: FeedbackSequence,
    rng: np.random.Generator,
    seed: int = 0,
    checkpoint_interval: int | None = None,
    record_rankings: bool = False,
    config_snapshot: dict | None = None,
) -> tuple[RunRecord, float]:
    """Run the output / observe / update loop over a whole sequence.

    Returns the :class:`RunRecord` and the mean wall-clock seconds per
    sampling step (kept out of the record so serialized results stay
    deterministic).
    """
    T = seq.T
    if checkpoint_interval is None:
        checkpoint_interval = max(1, T // 100)
    step_pairwise = np.empty(T)
    step_position = np.empty(T)
    rankings: list[Ranking] | None = [] if record_rankings else None
    sampling_seconds = 0.0
    for t in range(T):
        tic = time.perf_counter()
        ranking = learner.step(rng)
        sampling_seconds += time.perf_counter() - tic
        s = seq.scores[t]
        step_pairwise[t] = pairwise_loss(ranking, s)
        step_position[t] = position_loss(ranking, s)
        if rankings is not None:
            rankings.append(ranking)
        learner.update(s)
    cum = np.cumsum(step_pairwise)
    checkpoints = []
    for t in range(checkpoint_interval, T + 1, checkpoint_interval):
        prefix = seq.prefix(t)
        best = hindsight_best(prefix)
        checkpoints.append((t, float(cum[t - 1] - total_pairwise_loss(best, prefix))))
    best = hindsight_best(seq)
    best_loss = total_pairwise_loss(best, seq)
    record = RunRecord(
        seed=seed,
        eta=_learner_rate(learner),
        step_pairwise=step_pairwise,
        step_position=step_position,
        cum_pairwise=cum,
        hindsight=best,
        hindsight_loss=best_loss,
        regret=float(cum[-1] - best_loss),
        checkpoints=checkpoints,
        rankings=rankings,
        config=config_snapshot or {},
    )
    return record, sampling_seconds / max(T, 1)


def run(config: ExperimentConfig) -> tuple[list[RunRecord], list[float]]:
    """Execute one experiment per seed; returns records and per-seed mean
    step times."""
    setting = make_setting(config)
    record_rankings = (
        config.record_rankings
        if config.record_rankings is not None
        else config.n <= RANKING_STORAGE_LIMIT
    )
    records, timings = [], []
    for seed in config.seeds:
        seq = make_sequence(config, seed)
        learner = make_learner(
            config.learner,
            config.n,
            seq.T,
            setting,
            eta=config.eta,
            sampler=config.sampler,
            fpl_scale=config.fpl_scale,
            beta=config.beta,
        )
        rng = RngStream(seed, LEARNER_STREAM).generator()
        record, per_step = play(
            learner,
            seq,
            rng,
            seed=seed,
            checkpoint_interval=config.checkpoint_interval,
            record_rankings=record_rankings,
            config_snapshot=config.snapshot(),
        )
        records.append(record)
        timings.append(per_step)
    return records, timings


def bound_report(config: ExperimentConfig, records: list[RunRecord]) -> BoundReport:
    setting = make_setting(config)
    M = complexity_bound(setting, config.n)
    k_eff = config.k if config.setting == "k-choice" else 1
    return BoundReport.from_regrets(
        [r.regret for r in records],
        upper_bound=regret_upper_bound(config.n, config.T, M),
        lower_bound=regret_lower_bound(config.n, config.T, k_eff),
    )


# ---------------------------------------------------------------------------
# serialization

RESULTS_COLUMNS = ["seed", "t", "step_pairwise_loss", "cum_pairwise_loss", "prefix_regret_at_checkpoint"]


def write_results_csv(records: list[RunRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULTS_COLUMNS)
        for record in records:
            marks = dict(record.checkpoints)
            for t in range(record.step_pairwise.size):
                prefix_regret = marks.get(t + 1, "")
                writer.writerow(
                    [
                        record.seed,
                        t + 1,
                        record.step_pairwise[t],
                        record.cum_pairwise[t],
                        prefix_regret,
                    ]
                )


def write_summary_json(config: ExperimentConfig, records: list[RunRecord], path) -> None:
    report = bound_report(config, records)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": config.snapshot(),
        "eta": records[0].eta if records else None,
        "results": [
            {
                "seed": r.seed,
                "total_pairwise_loss": r.cum_pairwise[-1],
                "hindsight_loss": r.hindsight_loss,
                "regret": r.regret,
                "hindsight_order": (
                    r.hindsight.order().tolist() if r.hindsight.n <= RANKING_STORAGE_LIMIT else None
                ),
            }
            for r in records
        ],
        "aggregate": {
            "mean_regret": report.mean_regret,
            "stderr": report.stderr,
            "upper_bound": report.upper_bound,
            "lower_bound": report.lower_bound,
            "seeds": report.seeds,
        },
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_summary(path) -> dict:
    """Load a summary file, rejecting unknown schema versions."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported result schema version {version!r}")
    return payload


def write_timings(lines: list[str], path) -> None:
    # Wall-clock numbers are intentionally segregated from the CSV/JSON
    # outputs, which must be byte-identical across reruns.
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# wall-clock timings; excluded from the determinism contract\n")
        for line in lines:
            fh.write(line + "\n")


# ---------------------------------------------------------------------------
# sweeps

SWEEP_AXES = ("setting", "n", "k", "T", "learner", "sampler")

SWEEP_COLUMNS = [
    "setting", "n", "k", "T", "learner", "sampler", "seeds",
    "mean_regret", "stderr", "upper_bound", "lower_bound",
]


def sweep(base: ExperimentConfig, axes: dict) -> tuple[list[dict], list[str]]:
    """Cartesian-product sweep; one summary row per cell.

    ``axes`` maps axis names (a subset of setting/n/k/T/learner/sampler)
    to value lists.  Rows are emitted in deterministic axis order; each
    cell plays every seed of the base config.
    """
    for name in axes:
        if name not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {name!r}")
    names = [name for name in SWEEP_AXES if name in axes]
    rows, timing_lines = [], []
    for values in itertools.product(*(axes[name] for name in names)):
        overrides = dict(zip(names, values))
        cell = replace(base, **overrides)
        records, timings = run(replace(cell, out=None))
        report = bound_report(cell, records)
        row = {
            "setting": cell.setting,
            "n": cell.n,
            "k": cell.k if cell.k is not None else "",
            "T": cell.T,
            "learner": cell.learner,
            "sampler": cell.sampler,
            "seeds": len(cell.seeds),
            "mean_regret": report.mean_regret,
            "stderr": report.stderr,
            "upper_bound": report.upper_bound,
            "lower_bound": report.lower_bound,
        }
        rows.append(row)
        label = ",".join(f"{k}={v}" for k, v in overrides.items())
        timing_lines.append(f"{label or 'base'}: mean_step_seconds={np.mean(timings):.6g}")
    return rows, timing_lines


def write_sweep_csv(rows: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def write_sweep_json(base: ExperimentConfig, axes: dict, rows: list[dict], path) -> None:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": base.snapshot(),
        "axes": {k: list(v) for k, v in sorted(axes.items())},
        "rows": rows,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
