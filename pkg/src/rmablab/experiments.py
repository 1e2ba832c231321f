"""Experiment orchestration: configs, instance resolution, and result files.

A run takes an instance reference (built-in example, seeded random spec, or
an instance file), a list of policy specs, and evaluation sizes; it produces
a results CSV (one row per policy with return statistics and play
frequencies), a curves CSV (per-step cumulative discounted means with CI
bounds), and optional per-episode trace CSVs.  All files are written
atomically and use 1-based arm and state labels.
"""

from __future__ import annotations

import csv
import dataclasses
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .core import ArmModel, BanditInstance, Belief
from .errors import ConfigError
from .instances import (
    BUILTIN_NAMES,
    RandomInstanceSpec,
    builtin_instance,
    generate_instance,
)
from .policies import (
    MyopicPolicy,
    Policy,
    RandomPolicy,
    RolloutConfig,
    RolloutPolicy,
    WhittleConfig,
    WhittleIndexPolicy,
)
from .sim import EvalReport, evaluate

POLICY_KINDS = ("random", "myopic", "mc-rollout", "whittle")
OUT_DIR_ENV = "RMABLAB_OUT_DIR"
RESULTS_FILE = "results.csv"
CURVES_FILE = "curves.csv"


@dataclass(frozen=True)
class InstanceRef:
    """Which instance to run: a built-in example, a random spec, or a file."""

    kind: str
    example: int | None = None
    random: RandomInstanceSpec | None = None
    path: str | None = None

    def __post_init__(self):
        if self.kind == "example":
            if self.example is None or f"example-{self.example}" not in BUILTIN_NAMES:
                raise ConfigError(f"instance.example must be 1, 2 or 3, got {self.example}")
        elif self.kind == "random":
            if self.random is None:
                raise ConfigError("instance.random spec missing")
        elif self.kind == "file":
            if not self.path:
                raise ConfigError("instance.file path missing")
        else:
            raise ConfigError(f"unknown instance kind {self.kind!r}")


@dataclass(frozen=True)
class PolicySpec:
    """One policy to evaluate; ``label`` overrides the report name."""

    kind: str
    rollout: RolloutConfig | None = None
    whittle: WhittleConfig | None = None
    label: str | None = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ConfigError(f"unknown policy {self.kind!r}; choose from {POLICY_KINDS}")
        if self.rollout is not None and self.kind != "mc-rollout":
            raise ConfigError(f"rollout parameters only apply to mc-rollout, not {self.kind}")
        if self.whittle is not None and self.kind != "whittle":
            raise ConfigError(f"whittle parameters only apply to whittle, not {self.kind}")


@dataclass(frozen=True)
class ExperimentConfig:
    instance: InstanceRef
    policies: tuple[PolicySpec, ...]
    episodes: int = 500
    steps: int = 100
    discount: float | None = None
    seed: int = 0
    out_dir: str = "results"
    traces: bool = False
    parallel: bool = False

    def __post_init__(self):
        if not self.policies:
            raise ConfigError("at least one policy is required")
        if self.episodes < 1:
            raise ConfigError(f"episodes must be >= 1, got {self.episodes}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.discount is not None and not 0.0 <= self.discount < 1.0:
            raise ConfigError(f"discount must be in [0, 1), got {self.discount}")


# ---------------------------------------------------------------------------
# config (de)serialization

def _expect_mapping(node, path: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(node).__name__}")
    return node


def _take(node: dict, key: str, path: str, kind, default=None, required=False):
    if key not in node:
        if required:
            raise ConfigError(f"{path}.{key}: missing required field")
        return default
    value = node.pop(key)
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is not None and not isinstance(value, kind) or isinstance(value, bool) and kind is int:
        raise ConfigError(f"{path}.{key}: expected {kind.__name__}, got {value!r}")
    return value


def _reject_extra(node: dict, path: str) -> None:
    if node:
        raise ConfigError(f"{path}: unknown fields {sorted(node)}")


def _instance_from_dict(node, path: str) -> InstanceRef:
    node = dict(_expect_mapping(node, path))
    keys = set(node) & {"example", "random", "file"}
    if len(keys) != 1:
        raise ConfigError(f"{path}: give exactly one of example/random/file, got {sorted(node)}")
    if "example" in node:
        ref = InstanceRef(kind="example", example=_take(node, "example", path, int))
    elif "file" in node:
        ref = InstanceRef(kind="file", path=_take(node, "file", path, str))
    else:
        sub = dict(_expect_mapping(node.pop("random"), f"{path}.random"))
        spec = RandomInstanceSpec(
            n_arms=_take(sub, "n_arms", f"{path}.random", int, 15),
            n_states=_take(sub, "n_states", f"{path}.random", int, 4),
            seed=_take(sub, "seed", f"{path}.random", int, 0),
            increasing_click_prob=_take(sub, "increasing_click_prob", f"{path}.random", bool, True),
            shared_passive=_take(sub, "shared_passive", f"{path}.random", bool, True),
            discount=_take(sub, "discount", f"{path}.random", float, 0.95),
        )
        _reject_extra(sub, f"{path}.random")
        ref = InstanceRef(kind="random", random=spec)
    _reject_extra(node, path)
    return ref


def _policy_from_dict(node, path: str) -> PolicySpec:
    node = dict(_expect_mapping(node, path))
    kind = _take(node, "name", path, str, required=True)
    label = _take(node, "label", path, str)
    rollout = whittle = None
    try:
        if kind == "mc-rollout":
            rollout = RolloutConfig(
                horizon=_take(node, "horizon", path, int, 5),
                trajectories=_take(node, "trajectories", path, int, 100),
                base_policy=_take(node, "base", path, str, "myopic"),
            )
        elif kind == "whittle":
            whittle = WhittleConfig(
                subsidy_lo=_take(node, "subsidy_lo", path, float, 0.0),
                subsidy_hi=_take(node, "subsidy_hi", path, float, 1.0),
                tolerance=_take(node, "tolerance", path, float, 0.01),
                eval_horizon=_take(node, "eval_horizon", path, int, 50),
                eval_trajectories=_take(node, "eval_trajectories", path, int, 50),
                probe_points=_take(node, "probe_points", path, int, 11),
                diagnose_monotonicity=_take(node, "diagnose_monotonicity", path, bool, True),
            )
        spec = PolicySpec(kind=kind, rollout=rollout, whittle=whittle, label=label)
    except ConfigError as err:
        raise ConfigError(f"{path}: {err}") from None
    _reject_extra(node, path)
    return spec


def config_from_dict(data: dict, path: str = "config") -> ExperimentConfig:
    node = dict(_expect_mapping(data, path))
    if "instance" not in node:
        raise ConfigError(f"{path}.instance: missing required field")
    instance = _instance_from_dict(node.pop("instance"), f"{path}.instance")
    raw_policies = node.pop("policies", None)
    if not isinstance(raw_policies, list) or not raw_policies:
        raise ConfigError(f"{path}.policies: expected a non-empty list")
    policies = tuple(
        _policy_from_dict(p, f"{path}.policies[{i}]") for i, p in enumerate(raw_policies)
    )
    cfg = ExperimentConfig(
        instance=instance,
        policies=policies,
        episodes=_take(node, "episodes", path, int, 500),
        steps=_take(node, "steps", path, int, 100),
        discount=_take(node, "discount", path, float),
        seed=_take(node, "seed", path, int, 0),
        out_dir=_take(node, "out", path, str, default_out_dir()),
        traces=_take(node, "traces", path, bool, False),
        parallel=_take(node, "parallel", path, bool, False),
    )
    _reject_extra(node, path)
    return cfg


def config_to_dict(cfg: ExperimentConfig) -> dict:
    ref = cfg.instance
    if ref.kind == "example":
        instance: dict = {"example": ref.example}
    elif ref.kind == "file":
        instance = {"file": ref.path}
    else:
        instance = {"random": dataclasses.asdict(ref.random)}
    policies = []
    for spec in cfg.policies:
        node: dict = {"name": spec.kind}
        if spec.rollout is not None:
            node.update(horizon=spec.rollout.horizon,
                        trajectories=spec.rollout.trajectories,
                        base=spec.rollout.base_policy)
        if spec.whittle is not None:
            node.update(dataclasses.asdict(spec.whittle))
        if spec.label is not None:
            node["label"] = spec.label
        policies.append(node)
    out = {
        "instance": instance,
        "policies": policies,
        "episodes": cfg.episodes,
        "steps": cfg.steps,
        "seed": cfg.seed,
        "out": cfg.out_dir,
        "traces": cfg.traces,
        "parallel": cfg.parallel,
    }
    if cfg.discount is not None:
        out["discount"] = cfg.discount
    return out


def parse_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"config {path} is not valid YAML: {err}") from None
    return config_from_dict(data if data is not None else {}, path=str(path))


# ---------------------------------------------------------------------------
# instance and policy construction

def load_instance_file(path: str | Path) -> BanditInstance:
    """Read an instance from YAML; states in the file are 1-based."""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as err:
        raise ConfigError(f"cannot read instance file {path}: {err}") from None
    except yaml.YAMLError as err:
        raise ConfigError(f"instance file {path} is not valid YAML: {err}") from None
    node = dict(_expect_mapping(data, str(path)))
    where = str(path)
    name = _take(node, "name", where, str, path.stem)
    discount = _take(node, "discount", where, float, 0.95)
    raw_arms = node.pop("arms", None)
    if not isinstance(raw_arms, list) or not raw_arms:
        raise ConfigError(f"{where}.arms: expected a non-empty list")
    beliefs = node.pop("initial_beliefs", None)
    states = node.pop("initial_states", None)
    _reject_extra(node, where)
    if not isinstance(beliefs, list) or not isinstance(states, list):
        raise ConfigError(f"{where}: initial_beliefs and initial_states are required lists")
    try:
        arms = []
        for i, raw in enumerate(raw_arms):
            sub = dict(_expect_mapping(raw, f"{where}.arms[{i}]"))
            arms.append(ArmModel(
                p_active=np.asarray(sub.pop("p_active"), dtype=np.float64),
                p_passive=np.asarray(sub.pop("p_passive"), dtype=np.float64),
                click_prob=np.asarray(sub.pop("click_prob"), dtype=np.float64),
            ))
            _reject_extra(sub, f"{where}.arms[{i}]")
        return BanditInstance(
            arms=tuple(arms),
            initial_beliefs=tuple(Belief(np.asarray(b, dtype=np.float64)) for b in beliefs),
            initial_states=tuple(int(x) - 1 for x in states),
            discount=discount,
            name=name,
        )
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"{where}: invalid instance data: {err}") from None


def resolve_instance(cfg: ExperimentConfig) -> BanditInstance:
    ref = cfg.instance
    if ref.kind == "example":
        inst = builtin_instance(ref.example)
    elif ref.kind == "random":
        inst = generate_instance(ref.random)
    else:
        inst = load_instance_file(ref.path)
    if cfg.discount is not None and cfg.discount != inst.discount:
        inst = dataclasses.replace(inst, discount=cfg.discount)
    return inst


def build_policy(spec: PolicySpec, base_seed: int) -> Policy:
    if spec.kind == "random":
        return RandomPolicy(name=spec.label or "random")
    if spec.kind == "myopic":
        return MyopicPolicy(name=spec.label or "myopic")
    if spec.kind == "mc-rollout":
        return RolloutPolicy(spec.rollout or RolloutConfig(), name=spec.label or "")
    return WhittleIndexPolicy(spec.whittle or WhittleConfig(), index_seed=base_seed,
                              name=spec.label or "whittle")


def default_out_dir() -> str:
    return os.environ.get(OUT_DIR_ENV, "results")


# ---------------------------------------------------------------------------
# the run itself

@dataclass(frozen=True)
class RunResult:
    instance_name: str
    reports: tuple[EvalReport, ...]
    results_path: Path
    curves_path: Path
    trace_paths: tuple[Path, ...]


class _AtomicCsv:
    """CSV writer that lands the file via temp-and-rename."""

    def __init__(self, path: Path):
        self.path = path
        self.tmp = path.with_name(path.name + ".tmp")

    def __enter__(self) -> csv.writer:
        self._fh = self.tmp.open("w", newline="")
        return csv.writer(self._fh)

    def __exit__(self, exc_type, exc, tb):
        self._fh.close()
        if exc_type is None:
            os.replace(self.tmp, self.path)
        else:
            self.tmp.unlink(missing_ok=True)
        return False


def _write_trace(path: Path, instance: BanditInstance, sink_rows: list) -> None:
    n, s = instance.n_arms, instance.n_states
    header = ["episode", "t", "arm_played", "observation", "reward"]
    header += [f"belief_arm{j}_state{i}" for j in range(1, n + 1) for i in range(1, s + 1)]
    with _AtomicCsv(path) as writer:
        writer.writerow(header)
        writer.writerows(sink_rows)


def _trace_rows(episode: int, records) -> list:
    rows = []
    for rec in records:
        row = [episode, rec.t, rec.arm_played + 1, rec.observation.value, rec.reward]
        for belief in rec.beliefs_after:
            row.extend(f"{p:.10g}" for p in belief.probs)
        rows.append(row)
    return rows


def _evaluate_spec(spec: PolicySpec, instance: BanditInstance, cfg: ExperimentConfig,
                   out: Path) -> tuple[EvalReport, Path | None]:
    policy = build_policy(spec, cfg.seed)
    trace_path = None
    if cfg.traces:
        trace_path = out / f"trace_{policy.name}.csv"
        rows: list = []

        def on_episode(k, records):
            rows.extend(_trace_rows(k + 1, records))

        report = evaluate(instance, policy, cfg.episodes, cfg.steps, cfg.seed,
                          on_episode=on_episode)
        _write_trace(trace_path, instance, rows)
    else:
        report = evaluate(instance, policy, cfg.episodes, cfg.steps, cfg.seed)
    return report, trace_path


def run(cfg: ExperimentConfig, quiet: bool = False) -> RunResult:
    """Evaluate every configured policy and write the result files."""
    instance = resolve_instance(cfg)
    names = [build_policy(spec, cfg.seed).name for spec in cfg.policies]
    if len(set(names)) != len(names):
        raise ConfigError(
            f"duplicate policy names {sorted(names)}; disambiguate with 'label'"
        )
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if cfg.parallel and len(cfg.policies) > 1:
        with ThreadPoolExecutor(max_workers=len(cfg.policies)) as pool:
            results = list(pool.map(
                lambda spec: _evaluate_spec(spec, instance, cfg, out), cfg.policies
            ))
    else:
        results = [_evaluate_spec(spec, instance, cfg, out) for spec in cfg.policies]
    reports = tuple(r for r, _ in results)
    trace_paths = tuple(p for _, p in results if p is not None)

    n = instance.n_arms
    results_path = out / RESULTS_FILE
    with _AtomicCsv(results_path) as writer:
        writer.writerow(["policy", "episodes", "steps", "mean_return", "stderr",
                         "ci95_lo", "ci95_hi"]
                        + [f"freq_arm{j}" for j in range(1, n + 1)])
        for rep in reports:
            writer.writerow(
                [rep.policy_name, rep.episodes, rep.steps_per_episode,
                 f"{rep.mean_discounted_return:.6f}", f"{rep.stderr:.6f}",
                 f"{rep.ci95_lo:.6f}", f"{rep.ci95_hi:.6f}"]
                + [f"{f:.6f}" for f in rep.per_arm_play_frequency])

    curves_path = out / CURVES_FILE
    with _AtomicCsv(curves_path) as writer:
        writer.writerow(["policy", "step", "cum_mean", "cum_ci_lo", "cum_ci_hi"])
        for rep in reports:
            for t in range(rep.steps_per_episode):
                writer.writerow([rep.policy_name, t + 1,
                                 f"{rep.cumulative_discounted_curve[t]:.6f}",
                                 f"{rep.curve_ci_lo[t]:.6f}",
                                 f"{rep.curve_ci_hi[t]:.6f}"])

    if not quiet:
        _print_summary(instance, cfg, reports)
    return RunResult(
        instance_name=instance.name,
        reports=reports,
        results_path=results_path,
        curves_path=curves_path,
        trace_paths=trace_paths,
    )


def _print_summary(instance: BanditInstance, cfg: ExperimentConfig, reports) -> None:
    print(f"instance {instance.name}: {instance.n_arms} arms, "
          f"{instance.n_states} states, discount {instance.discount}")
    print(f"{cfg.episodes} episodes x {cfg.steps} steps, seed {cfg.seed}")
    width = max(len(r.policy_name) for r in reports)
    for rep in reports:
        favorite = int(np.argmax(rep.per_arm_play_frequency)) + 1
        print(f"  {rep.policy_name:<{width}}  return {rep.mean_discounted_return:7.4f} "
              f"[{rep.ci95_lo:7.4f}, {rep.ci95_hi:7.4f}]  "
              f"top arm {favorite} "
              f"({rep.per_arm_play_frequency[favorite - 1]:.0%} of plays)")
