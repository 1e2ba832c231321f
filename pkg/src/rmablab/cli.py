"""Command-line entry point.

Subcommands: ``run`` (evaluate policies on an instance and write CSVs),
``validate`` (parse a config and report problems), ``list-examples``.
Exit codes: 0 success, 2 configuration problem, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .errors import ConfigError
from .experiments import (
    ExperimentConfig,
    InstanceRef,
    PolicySpec,
    default_out_dir,
    parse_config,
    run,
)
from .instances import BUILTIN_NAMES, RandomInstanceSpec, builtin_instance
from .policies import RolloutConfig, WhittleConfig

_DEFAULT_POLICIES = (
    PolicySpec(kind="myopic"),
    PolicySpec(kind="mc-rollout", rollout=RolloutConfig()),
)


def _parse_kv(text: str, what: str) -> dict[str, str]:
    out: dict[str, str] = {}
    if not text:
        return out
    for part in text.split(","):
        if "=" not in part:
            raise ConfigError(f"{what}: expected key=value, got {part!r}")
        key, value = part.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _as_int(value: str, what: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{what}: expected an integer, got {value!r}") from None


def _as_float(value: str, what: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{what}: expected a number, got {value!r}") from None


def _as_bool(value: str, what: str) -> bool:
    low = value.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ConfigError(f"{what}: expected true/false, got {value!r}")


def _parse_random_spec(text: str) -> RandomInstanceSpec:
    kv = _parse_kv(text, "--random")
    kwargs: dict = {}
    for key, value in kv.items():
        if key in ("n_arms", "n_states", "seed"):
            kwargs[key] = _as_int(value, f"--random {key}")
        elif key in ("increasing", "increasing_click_prob"):
            kwargs["increasing_click_prob"] = _as_bool(value, f"--random {key}")
        elif key == "shared_passive":
            kwargs[key] = _as_bool(value, f"--random {key}")
        elif key == "discount":
            kwargs[key] = _as_float(value, f"--random {key}")
        else:
            raise ConfigError(f"--random: unknown key {key!r}")
    return RandomInstanceSpec(**kwargs)


def _parse_policy_spec(text: str) -> PolicySpec:
    name, _, params = text.partition(":")
    name = name.strip()
    kv = _parse_kv(params, f"--policy {name}")
    where = f"--policy {name}"
    label = kv.pop("label", None)
    if name == "mc-rollout":
        kwargs: dict = {}
        for key, value in kv.items():
            if key in ("H", "horizon"):
                kwargs["horizon"] = _as_int(value, f"{where} {key}")
            elif key in ("L", "trajectories"):
                kwargs["trajectories"] = _as_int(value, f"{where} {key}")
            elif key == "base":
                kwargs["base_policy"] = value
            else:
                raise ConfigError(f"{where}: unknown key {key!r}")
        return PolicySpec(kind=name, rollout=RolloutConfig(**kwargs), label=label)
    if name == "whittle":
        kwargs = {}
        for key, value in kv.items():
            if key in ("lo", "subsidy_lo"):
                kwargs["subsidy_lo"] = _as_float(value, f"{where} {key}")
            elif key in ("hi", "subsidy_hi"):
                kwargs["subsidy_hi"] = _as_float(value, f"{where} {key}")
            elif key in ("tol", "tolerance"):
                kwargs["tolerance"] = _as_float(value, f"{where} {key}")
            elif key in ("horizon", "eval_horizon"):
                kwargs["eval_horizon"] = _as_int(value, f"{where} {key}")
            elif key in ("trajectories", "eval_trajectories"):
                kwargs["eval_trajectories"] = _as_int(value, f"{where} {key}")
            else:
                raise ConfigError(f"{where}: unknown key {key!r}")
        return PolicySpec(kind=name, whittle=WhittleConfig(**kwargs), label=label)
    if name in ("myopic", "random"):
        if kv:
            raise ConfigError(f"{where} takes no parameters, got {sorted(kv)}")
        return PolicySpec(kind=name, label=label)
    raise ConfigError(f"--policy: unknown policy {name!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmablab",
        description="Hidden-Markov restless bandit policy laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="evaluate policies on an instance")
    runp.add_argument("--example", type=int, choices=(1, 2, 3),
                      help="built-in benchmark instance")
    runp.add_argument("--random", nargs="?", const="", metavar="KEY=VAL,...",
                      help="random instance, e.g. n_arms=15,seed=3")
    runp.add_argument("--config", metavar="PATH", help="YAML experiment config")
    runp.add_argument("--policy", action="append", metavar="SPEC",
                      help="policy with inline params, e.g. mc-rollout:H=5,L=100,"
                           "base=myopic (repeatable; default: myopic + mc-rollout)")
    runp.add_argument("--episodes", type=int)
    runp.add_argument("--steps", type=int)
    runp.add_argument("--beta", type=float, help="discount factor override")
    runp.add_argument("--seed", type=int)
    runp.add_argument("--out", metavar="DIR",
                      help=f"output directory (default ${'{'}RMABLAB_OUT_DIR{'}'} or ./results)")
    runp.add_argument("--traces", action="store_true", help="write per-episode trace CSVs")
    runp.add_argument("--parallel", action="store_true",
                      help="evaluate policies in parallel threads")

    valp = sub.add_parser("validate", help="check an experiment config file")
    valp.add_argument("config_path", metavar="CONFIG")

    sub.add_parser("list-examples", help="show the built-in instances")
    return parser


def _run_config_from_args(args) -> ExperimentConfig:
    instance_flags = sum(x is not None for x in (args.example, args.random, args.config))
    if instance_flags == 0:
        raise ConfigError("choose an instance: --example, --random or --config")
    if args.example is not None and args.random is not None:
        raise ConfigError("--example and --random are mutually exclusive")

    if args.config is not None:
        cfg = parse_config(args.config)
        if args.example is not None:
            cfg = dataclasses.replace(cfg, instance=InstanceRef(kind="example", example=args.example))
        elif args.random is not None:
            cfg = dataclasses.replace(
                cfg, instance=InstanceRef(kind="random", random=_parse_random_spec(args.random)))
    else:
        if args.example is not None:
            ref = InstanceRef(kind="example", example=args.example)
        else:
            ref = InstanceRef(kind="random", random=_parse_random_spec(args.random))
        cfg = ExperimentConfig(instance=ref, policies=_DEFAULT_POLICIES,
                               out_dir=default_out_dir())

    if args.policy:
        cfg = dataclasses.replace(
            cfg, policies=tuple(_parse_policy_spec(p) for p in args.policy))
    overrides: dict = {}
    if args.episodes is not None:
        overrides["episodes"] = args.episodes
    if args.steps is not None:
        overrides["steps"] = args.steps
    if args.beta is not None:
        overrides["discount"] = args.beta
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.traces:
        overrides["traces"] = True
    if args.parallel:
        overrides["parallel"] = True
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "list-examples":
            for name in BUILTIN_NAMES:
                inst = builtin_instance(name)
                print(f"{name}: {inst.n_arms} arms, {inst.n_states} states, "
                      f"discount {inst.discount}")
            return 0
        if args.command == "validate":
            cfg = parse_config(args.config_path)
            print(f"{args.config_path}: OK ({len(cfg.policies)} policies, "
                  f"{cfg.episodes} episodes x {cfg.steps} steps)")
            return 0
        result = run(_run_config_from_args(args))
        print(f"results: {result.results_path}")
        print(f"curves:  {result.curves_path}")
        for path in result.trace_paths:
            print(f"trace:   {path}")
        return 0
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # runtime failures map to exit 3
        print(f"error: {err}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())
