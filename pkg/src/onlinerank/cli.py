"""Command-line front end: run, sweep, verify, gen-trace.

Configuration precedence is flags > config file > defaults.  The config
file is YAML with nested sections (setting / learner / adversary / run /
sweep).  Exit codes: 0 success, 1 runtime fault, 2 configuration error,
3 trace validation error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .environments import TraceError, save_trace
from .harness import (
    ConfigError,
    ExperimentConfig,
    bound_report,
    make_sequence,
    run,
    sweep,
    write_results_csv,
    write_summary_json,
    write_sweep_csv,
    write_sweep_json,
    write_timings,
)
from .verify import SUITES, run_suite


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must be a mapping of sections")
    return data


def _build_config(args) -> ExperimentConfig:
    data = _load_config_file(getattr(args, "config", None))
    setting = data.get("setting", {}) or {}
    learner = data.get("learner", {}) or {}
    adversary = data.get("adversary", {}) or {}
    run_section = data.get("run", {}) or {}

    def pick(flag_value, file_value, default):
        if flag_value is not None:
            return flag_value
        if file_value is not None:
            return file_value
        return default

    seeds = args.seed if getattr(args, "seed", None) else run_section.get("seeds")
    if seeds is None:
        seeds = [0]
    if isinstance(seeds, int):
        seeds = list(range(seeds))
    eta = pick(getattr(args, "eta", None), learner.get("eta"), "auto")
    if eta != "auto":
        try:
            eta = float(eta)
        except (TypeError, ValueError):
            raise ConfigError(f"eta must be 'auto' or a number, got {eta!r}") from None
    try:
        return ExperimentConfig(
            setting=pick(getattr(args, "setting", None), setting.get("kind"), "single"),
            n=int(pick(getattr(args, "n", None), setting.get("n"), 10)),
            k=(lambda v: int(v) if v is not None else None)(
                pick(getattr(args, "k", None), setting.get("k"), None)
            ),
            T=int(pick(getattr(args, "T", None), setting.get("T"), 1000)),
            learner=pick(getattr(args, "learner", None), learner.get("id"), "online-rank"),
            eta=eta,
            sampler=pick(getattr(args, "sampler", None), learner.get("sampler"), "pl-gumbel"),
            fpl_scale=learner.get("fpl_scale", "auto"),
            beta=learner.get("beta", "auto"),
            adversary=pick(getattr(args, "adversary", None), adversary.get("id"), "auto"),
            trace=pick(getattr(args, "trace", None), adversary.get("trace"), None),
            seeds=tuple(int(s) for s in seeds),
            out=pick(getattr(args, "out", None), run_section.get("out"), None),
            checkpoint_interval=pick(
                getattr(args, "checkpoints", None), run_section.get("checkpoint_interval"), None
            ),
            record_rankings=run_section.get("record_rankings"),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def _add_common_flags(sub) -> None:
    sub.add_argument("--config", help="YAML config file")
    sub.add_argument("--seed", type=int, action="append", help="seed (repeatable)")
    sub.add_argument("--out", help="output directory (or file for gen-trace)")
    sub.add_argument("--learner", choices=["online-rank", "fpl", "mw-explicit"])
    sub.add_argument("--sampler", choices=["quicksort", "pl", "pl-gumbel"])
    sub.add_argument("--setting", choices=["single", "k-choice", "general", "spearman"])
    sub.add_argument("--adversary", choices=[
        "auto", "uniform-single", "uniform-k", "spearman-uniform", "spearman-fixed", "trace",
    ])
    sub.add_argument("--trace", help="trace file path (adversary input)")
    sub.add_argument("--n", type=int)
    sub.add_argument("--k", type=int)
    sub.add_argument("--T", type=int)
    sub.add_argument("--eta", help="'auto' or a positive number")
    sub.add_argument("--checkpoints", type=int, help="checkpoint interval in rounds")


def cmd_run(args) -> int:
    config = _build_config(args)
    records, timings = run(config)
    report = bound_report(config, records)
    print(
        f"learner={config.learner} setting={config.setting} n={config.n} T={config.T} "
        f"seeds={len(config.seeds)} eta={records[0].eta:.6g}"
    )
    print(
        f"mean regret {report.mean_regret:.3f} +- {report.stderr:.3f} "
        f"(upper bound {report.upper_bound:.1f}, lower-bound scale {report.lower_bound:.1f})"
    )
    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        write_results_csv(records, out / "results.csv")
        write_summary_json(config, records, out / "summary.json")
        write_timings(
            [f"seed={r.seed}: mean_step_seconds={t:.6g}" for r, t in zip(records, timings)],
            out / "timings.txt",
        )
        print(f"wrote {out / 'results.csv'}, {out / 'summary.json'}")
    return 0


def cmd_sweep(args) -> int:
    data = _load_config_file(args.config)
    axes = data.get("sweep")
    if not axes:
        raise ConfigError("sweep requires a 'sweep' section with axis lists")
    base = _build_config(args)
    rows, timing_lines = sweep(base, axes)
    header = "  ".join(f"{c:>12}" for c in rows[0].keys())
    print(header)
    for row in rows:
        print("  ".join(f"{str(v)[:12]:>12}" for v in row.values()))
    if base.out:
        out = Path(base.out)
        out.mkdir(parents=True, exist_ok=True)
        write_sweep_csv(rows, out / "sweep.csv")
        write_sweep_json(base, axes, rows, out / "sweep.json")
        write_timings(timing_lines, out / "timings.txt")
        print(f"wrote {out / 'sweep.csv'}, {out / 'sweep.json'}")
    return 0


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        raise ConfigError(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}")
    results = run_suite(args.suite)
    for result in results:
        print(result.line())
    return 0 if all(r.passed for r in results) else 1


def cmd_gen_trace(args) -> int:
    config = _build_config(args)
    if not config.out:
        raise ConfigError("gen-trace requires --out FILE")
    seq = make_sequence(config, config.seeds[0])
    save_trace(
        seq,
        config.out,
        header=f"setting={config.setting} n={config.n} T={seq.T} "
        f"adversary={config.adversary} seed={config.seeds[0]}",
    )
    print(f"wrote {seq.T} rounds to {config.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onlinerank",
        description="Online ranking experiments: weight-based randomized-sorting "
        "learners, baselines, adversaries, and regret accounting.",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name, fn, extra in (
        ("run", cmd_run, "play a learner against an adversary and record losses"),
        ("sweep", cmd_sweep, "grid of runs with one summary row per cell"),
        ("gen-trace", cmd_gen_trace, "emit an adversary sequence to a trace file"),
    ):
        sub = subs.add_parser(name, help=extra)
        _add_common_flags(sub)
        sub.set_defaults(func=fn)
    sub = subs.add_parser("verify", help="run a named verification suite")
    sub.add_argument("suite", help=f"one of {sorted(SUITES)}")
    sub.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TraceError as exc:
        print(f"trace error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime fault
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
