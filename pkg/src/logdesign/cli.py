"""Command-line surface: design policies, evaluate designs, run sweeps,
and reproduce the built-in figures.

Exit codes: 0 success, 1 validation error (bad inputs, unknown names,
missing requirements), 2 I/O error (unreadable or unwritable paths).
All subcommands are deterministic given their flags (including --seed) and
never mutate their input files.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .design import (
    TargetEnsemble,
    design_known_mu_minimax,
    design_match_target,
    design_neyman,
    design_pseudo_target,
    design_uniform,
)
from .env import Environment
from .evaluation import closed_form_mse, monte_carlo_mse
from .experiments import builtin_configs, config_from_dict, run_experiment, summarize
from .policy import Policy

REGIMES = ("uniform", "minimax-mu", "match-target", "neyman", "pseudo-target")
_TARGET_REGIMES = ("match-target", "neyman", "pseudo-target")


class ValidationError(Exception):
    pass


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IOError(f"cannot read {path}: {exc}") from exc


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc


def _load_env(path: str) -> Environment:
    try:
        return Environment.from_json(_read_text(path))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"invalid environment file {path}: {exc}") from exc


def _load_policy(path: str) -> Policy:
    try:
        return Policy.from_json(_read_text(path))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"invalid policy file {path}: {exc}") from exc


def _load_ensemble(path: str) -> TargetEnsemble:
    try:
        doc = json.loads(_read_text(path))
        if "policies" in doc:
            policies = [Policy(probs=np.asarray(p["probs"], dtype=np.float64)) for p in doc["policies"]]
            return TargetEnsemble(policies=policies, weights=np.asarray(doc["weights"], dtype=np.float64))
        return TargetEnsemble(
            policies=[Policy(probs=np.asarray(doc["probs"], dtype=np.float64))], weights=np.array([1.0])
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"invalid target file {path}: {exc}") from exc


def _fmt(value: float) -> str:
    return format(float(value), ".3e")


def _cmd_design(args) -> int:
    if args.regime not in REGIMES:
        raise ValidationError(f"unknown regime {args.regime!r}; expected one of {', '.join(REGIMES)}")
    env = _load_env(args.env)
    if args.regime in _TARGET_REGIMES and args.target is None:
        raise ValidationError(f"regime {args.regime!r} requires --target")
    if args.regime == "uniform":
        report = design_uniform(env)
    elif args.regime == "minimax-mu":
        report = design_known_mu_minimax(env)
    elif args.regime == "match-target":
        report = design_match_target(_load_policy(args.target))
    elif args.regime == "neyman":
        report = design_neyman(env, _load_policy(args.target))
    else:
        report = design_pseudo_target(env, _load_ensemble(args.target))
    _write_text(args.out, report.to_json())
    print(f"{args.regime}: wrote design for {env.n_actions} actions x {env.n_contexts} contexts to {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    env = _load_env(args.env)
    target = _load_policy(args.target)
    logging_policy = _load_policy(args.logging)
    breakdown = closed_form_mse(env, target, logging_policy, args.n)
    doc = {"closed_form": breakdown.to_dict()}
    if args.mc:
        summary = monte_carlo_mse(env, target, logging_policy, args.n, args.mc, seed=args.seed)
        doc["monte_carlo"] = summary.to_dict()
    text = json.dumps(doc, indent=2)
    if args.out:
        _write_text(args.out, text)
    else:
        print(text)
    print(
        f"n={args.n}: mse = {_fmt(breakdown.mse)} "
        f"(bias_sq = {_fmt(breakdown.bias_sq)}, variance = {_fmt(breakdown.variance)})",
        file=sys.stderr if not args.out else sys.stdout,
    )
    return 0


def _print_summary(rows) -> None:
    for label, n, parameter, mse in summarize(rows):
        print(f"{label} n={n}: argmin parameter = {_fmt(parameter)} min mse = {_fmt(mse)}")


def _cmd_sweep(args) -> int:
    try:
        config = config_from_dict(json.loads(_read_text(args.config)))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"invalid config file {args.config}: {exc}") from exc
    if args.seed is not None:
        config = replace(config, base_seed=args.seed)
    if args.trials is not None:
        config = replace(config, trials=args.trials)
    out_path = args.out or config.output_path
    rows = run_experiment(config, out_path=out_path, jobs=args.jobs)
    print(f"{config.name}: wrote {len(rows)} rows to {out_path}")
    _print_summary(rows)
    return 0


def _cmd_reproduce_figure(args) -> int:
    configs = builtin_configs(scale=args.scale)
    if args.name not in configs:
        raise ValidationError(f"unknown figure {args.name!r}; valid ids: {', '.join(sorted(configs))}")
    config = configs[args.name]
    if args.seed is not None:
        config = replace(config, base_seed=args.seed)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IOError(f"cannot create {out_dir}: {exc}") from exc
    out_path = out_dir / config.output_path
    rows = run_experiment(config, out_path=out_path, jobs=args.jobs)
    print(f"{config.name}: wrote {len(rows)} rows to {out_path}")
    _print_summary(rows)
    return 0


def _cmd_list_figures(_args) -> int:
    for name in builtin_configs():
        print(name)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logdesign",
        description="Design logging policies that minimize IPW off-policy-evaluation error.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="construct a logging policy for a regime")
    p.add_argument("--env", required=True, help="environment JSON file")
    p.add_argument("--regime", required=True, help=f"one of: {', '.join(REGIMES)}")
    p.add_argument("--target", default=None, help="target policy JSON (or ensemble JSON for pseudo-target)")
    p.add_argument("--out", required=True, help="output path for the design report JSON")
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("evaluate", help="closed-form (and optional Monte Carlo) error of a design")
    p.add_argument("--env", required=True)
    p.add_argument("--target", required=True, help="target policy JSON")
    p.add_argument("--logging", required=True, help="logging policy JSON")
    p.add_argument("--n", type=int, default=1000, help="sample size (default 1000)")
    p.add_argument("--mc", type=int, default=0, help="Monte Carlo replications (default 0 = closed form only)")
    p.add_argument("--seed", type=int, default=0, help="Monte Carlo seed (default 0)")
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("sweep", help="run an experiment config file and write its CSV")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", default=None, help="CSV path (default: config output_path)")
    p.add_argument("--seed", type=int, default=None, help="override the config base seed")
    p.add_argument("--trials", type=int, default=None, help="override the config trial count")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("reproduce-figure", help="run a built-in figure config")
    p.add_argument("name", help="figure id (see list-figures)")
    p.add_argument("--out-dir", default=".", help="directory for the CSV (default .)")
    p.add_argument("--scale", type=int, default=1, help="divide expensive dimensions by this (default 1)")
    p.add_argument("--seed", type=int, default=None, help="override the built-in base seed")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.set_defaults(func=_cmd_reproduce_figure)

    p = sub.add_parser("list-figures", help="print the built-in figure ids")
    p.set_defaults(func=_cmd_list_figures)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except IOError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
