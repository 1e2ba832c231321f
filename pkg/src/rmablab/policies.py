"""Decision rules: uniform random, myopic, Monte Carlo rollout, and a
Monte-Carlo Whittle index, plus the stateful policy handles the simulation
harness drives.

All selection functions are pure given their random stream and break ties by
choosing the lowest arm index.  Rollout scoring and index estimation use
common random numbers: one pre-drawn uniform table is shared across the
alternatives being compared (first actions, or subsidy candidates), which
sharpens comparisons without biasing the argmax.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np

from . import _kernels
from .core import ArmModel, BanditInstance, Belief, expected_reward
from .errors import ConfigError, NoCrossingInBracketError, NonMonotoneIndexWarning

BASE_POLICIES = ("myopic", "random")

_BASE_CODES = {"myopic": _kernels.BASE_MYOPIC, "random": _kernels.BASE_RANDOM}


@dataclass(frozen=True)
class RolloutConfig:
    """Rollout planner knobs: horizon H, trajectory count L, base policy."""

    horizon: int = 5
    trajectories: int = 100
    base_policy: str = "myopic"

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigError(f"rollout horizon must be >= 1, got {self.horizon}")
        if self.trajectories < 1:
            raise ConfigError(f"rollout trajectories must be >= 1, got {self.trajectories}")
        if self.base_policy not in BASE_POLICIES:
            raise ConfigError(
                f"base_policy must be one of {BASE_POLICIES}, got {self.base_policy!r}"
            )


@dataclass(frozen=True, eq=False)
class RolloutEstimate:
    """Per-arm rollout diagnostics.

    ``q_tilde`` is the raw averaged continuation return, ``q_values`` the
    improved score r + discount * q_tilde actually maximized, and ``stderr``
    the standard error of ``q_values`` across trajectories.
    """

    q_values: np.ndarray
    q_tilde: np.ndarray
    stderr: np.ndarray


@dataclass(frozen=True)
class WhittleConfig:
    """Subsidy-bisection knobs for the Monte-Carlo index."""

    subsidy_lo: float = 0.0
    subsidy_hi: float = 1.0
    tolerance: float = 0.01
    eval_horizon: int = 50
    eval_trajectories: int = 50
    probe_points: int = 11
    diagnose_monotonicity: bool = True

    def __post_init__(self):
        if not self.subsidy_lo < self.subsidy_hi:
            raise ConfigError(
                f"need subsidy_lo < subsidy_hi, got [{self.subsidy_lo}, {self.subsidy_hi}]"
            )
        if self.tolerance <= 0:
            raise ConfigError(f"tolerance must be > 0, got {self.tolerance}")
        if self.eval_horizon < 1 or self.eval_trajectories < 1:
            raise ConfigError("eval_horizon and eval_trajectories must be >= 1")
        if self.probe_points < 2:
            raise ConfigError(f"probe_points must be >= 2, got {self.probe_points}")


@dataclass(frozen=True, eq=False)
class PolicyDecision:
    """One decision: chosen arm, the per-arm scores maximized, diagnostics."""

    arm: int
    scores: np.ndarray
    diagnostics: RolloutEstimate | None = None


def random_select(n_arms: int, rng: np.random.Generator) -> PolicyDecision:
    """Uniform choice over arms; scores are flat (the rng breaks the tie)."""
    if n_arms < 1:
        raise ValueError(f"n_arms must be >= 1, got {n_arms}")
    arm = int(rng.integers(n_arms))
    return PolicyDecision(arm=arm, scores=np.full(n_arms, 1.0 / n_arms))


def myopic_select(beliefs: list[Belief], instance: BanditInstance) -> PolicyDecision:
    """Play the arm with the highest immediate expected reward."""
    scores = np.array([expected_reward(b, a) for b, a in zip(beliefs, instance.arms)])
    return PolicyDecision(arm=int(np.argmax(scores)), scores=scores)


def _forced_return(belief_mat: np.ndarray, first_action: int, instance: BanditInstance,
                   extra_steps: int, base_code: int, u_obs: np.ndarray,
                   u_act: np.ndarray) -> float:
    """Python mirror of one kernel trajectory: forced first play, then the
    base policy for ``extra_steps`` steps, expected rewards, sampled branches."""
    p_act = instance.p_active_stack
    p_pas = instance.p_passive_stack
    click = instance.click_stack
    n = instance.n_arms
    b = belief_mat.copy()
    total = 0.0
    df = 1.0
    for h in range(extra_steps + 1):
        if h == 0:
            a = first_action
            r = float(b[a] @ click[a])
        elif base_code == _kernels.BASE_MYOPIC:
            vals = (b * click).sum(axis=1)
            a = int(np.argmax(vals))
            r = float(vals[a])
        else:
            a = min(int(u_act[h] * n), n - 1)
            r = float(b[a] @ click[a])
        total += df * r
        df *= instance.discount
        if h == extra_steps:
            break
        like = u_obs[h] < r
        weights = click[a] if like else 1.0 - click[a]
        numer = (b[a] * weights) @ p_act[a]
        b = np.einsum("ji,jik->jk", b, p_pas)
        b[a] = numer / numer.sum()
    return total


def rollout_trajectory(beliefs: list[Belief], first_action: int,
                       instance: BanditInstance, cfg: RolloutConfig,
                       rng: np.random.Generator) -> float:
    """One H-step belief-space rollout return with the first action forced.

    Plays ``first_action`` at the first step and the base policy thereafter;
    each step accrues the discounted expected reward of the played arm and
    samples a like/dislike to branch that arm's belief.
    """
    if not 0 <= first_action < instance.n_arms:
        raise ValueError(f"first_action {first_action} out of range")
    belief_mat = np.stack([b.probs for b in beliefs])
    u_obs = rng.random(cfg.horizon)
    u_act = rng.random(cfg.horizon)
    return _forced_return(belief_mat, first_action, instance, cfg.horizon - 1,
                          _BASE_CODES[cfg.base_policy], u_obs, u_act)


def mc_rollout_select(beliefs: list[Belief], instance: BanditInstance,
                      cfg: RolloutConfig, rng: np.random.Generator) -> PolicyDecision:
    """One-step improved rollout decision.

    For each arm j, scores(j) = expected_reward(j) + discount * q_tilde(j)
    where q_tilde averages L simulated continuation returns of ``cfg.horizon``
    steps following the base policy after the forced first play.  The same L
    noise rows drive every arm's trajectories (common random numbers).
    """
    belief_mat = np.stack([b.probs for b in beliefs])
    n_traj = cfg.trajectories
    u_obs = rng.random((n_traj, cfg.horizon + 1))
    u_act = rng.random((n_traj, cfg.horizon + 1))
    r0, g = _kernels.rollout_batch(
        belief_mat, instance.p_active_stack, instance.p_passive_stack,
        instance.click_stack, instance.discount, cfg.horizon,
        u_obs, u_act, _BASE_CODES[cfg.base_policy],
    )
    q_tilde = g.mean(axis=1)
    q_values = r0 + instance.discount * q_tilde
    if n_traj > 1:
        spread = g.std(axis=1, ddof=1)
    else:
        spread = np.zeros(instance.n_arms)
    stderr = instance.discount * spread / np.sqrt(n_traj)
    est = RolloutEstimate(q_values=q_values, q_tilde=q_tilde, stderr=stderr)
    return PolicyDecision(arm=int(np.argmax(q_values)), scores=q_values, diagnostics=est)


def _value_difference(belief: Belief, arm: ArmModel, discount: float, subsidy: float,
                      horizon: int, u_obs: np.ndarray) -> float:
    v_play, v_passive = _kernels.whittle_value_pair(
        belief.probs, arm.p_active, arm.p_passive, arm.click_prob,
        discount, subsidy, horizon, u_obs,
    )
    return v_play - v_passive


def whittle_index(belief: Belief, arm: ArmModel, discount: float, cfg: WhittleConfig,
                  rng: np.random.Generator) -> float:
    """Subsidy level at which playing and resting are estimated equally good.

    Bisects on the subsidy; each candidate's play-first and passive-first
    values come from ``eval_trajectories`` rollouts of ``eval_horizon`` steps
    following the subsidy-greedy rule, all candidates sharing one noise table
    (common random numbers), so the estimated value difference is a
    deterministic, decreasing-in-subsidy function for the drawn noise.

    Raises NoCrossingInBracketError when the difference does not change sign
    over the bracket, and emits NonMonotoneIndexWarning when the probe grid
    shows the difference increasing somewhere (indexability violation signal).
    """
    u_obs = rng.random((cfg.eval_trajectories, cfg.eval_horizon))
    lo, hi = cfg.subsidy_lo, cfg.subsidy_hi

    def diff(w: float) -> float:
        return _value_difference(belief, arm, discount, w, cfg.eval_horizon, u_obs)

    if cfg.diagnose_monotonicity:
        grid = np.linspace(lo, hi, cfg.probe_points)
        probes = np.array([diff(w) for w in grid])
        if np.any(np.diff(probes) > 1e-9):
            warnings.warn(
                "play-minus-passive value difference is not decreasing across "
                f"the probe grid on [{lo}, {hi}]",
                NonMonotoneIndexWarning,
                stacklevel=2,
            )
        d_lo, d_hi = float(probes[0]), float(probes[-1])
    else:
        d_lo, d_hi = diff(lo), diff(hi)

    if d_lo < 0.0:
        raise NoCrossingInBracketError("below", lo, hi)
    if d_hi > 0.0:
        raise NoCrossingInBracketError("above", lo, hi)
    while hi - lo > cfg.tolerance:
        mid = 0.5 * (lo + hi)
        if diff(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _whittle_score(belief: Belief, arm: ArmModel, discount: float, cfg: WhittleConfig,
                   rng: np.random.Generator) -> float:
    """Index value, with out-of-bracket arms clamped to the bracket edge."""
    try:
        return whittle_index(belief, arm, discount, cfg, rng)
    except NoCrossingInBracketError as err:
        return cfg.subsidy_lo if err.side == "below" else cfg.subsidy_hi


def whittle_select(beliefs: list[Belief], instance: BanditInstance, cfg: WhittleConfig,
                   rng: np.random.Generator) -> PolicyDecision:
    """Play the arm with the highest estimated subsidy index."""
    scores = np.array([
        _whittle_score(b, a, instance.discount, cfg, rng)
        for b, a in zip(beliefs, instance.arms)
    ])
    return PolicyDecision(arm=int(np.argmax(scores)), scores=scores)


@runtime_checkable
class Policy(Protocol):
    """What the episode runner needs: a name and a per-step selection."""

    name: str

    def select(self, beliefs: list[Belief], instance: BanditInstance,
               rng: np.random.Generator) -> PolicyDecision: ...


@dataclass
class RandomPolicy:
    name: str = "random"

    def select(self, beliefs, instance, rng):
        return random_select(instance.n_arms, rng)


@dataclass
class MyopicPolicy:
    name: str = "myopic"

    def select(self, beliefs, instance, rng):
        return myopic_select(beliefs, instance)


@dataclass
class RolloutPolicy:
    cfg: RolloutConfig = field(default_factory=RolloutConfig)
    name: str = ""

    def __post_init__(self):
        if not self.name:
            suffix = "" if self.cfg.base_policy == "myopic" else f"-{self.cfg.base_policy}"
            self.name = f"mc-rollout{suffix}"

    def select(self, beliefs, instance, rng):
        return mc_rollout_select(beliefs, instance, self.cfg, rng)


def _belief_key(belief: Belief) -> bytes:
    return np.round(belief.probs, 12).tobytes()


class WhittleIndexPolicy:
    """Index policy with a cross-episode cache of computed indices.

    The index of (arm, belief) is computed with a random stream derived by
    hashing (index_seed, arm, rounded belief), not from the episode's stream,
    so it is a pure function of its inputs; the cache is then transparent and
    results do not depend on visit order.  The per-step ``rng`` argument is
    accepted for interface uniformity and left untouched.
    """

    def __init__(self, cfg: WhittleConfig | None = None, index_seed: int = 0,
                 name: str = "whittle"):
        self.cfg = cfg if cfg is not None else WhittleConfig()
        self.index_seed = index_seed
        self.name = name
        self._cache: dict[tuple[int, bytes], float] = {}

    def _index_rng(self, arm_idx: int, key: bytes) -> np.random.Generator:
        digest = hashlib.blake2b(digest_size=8)
        digest.update(self.index_seed.to_bytes(8, "little", signed=True))
        digest.update(arm_idx.to_bytes(4, "little"))
        digest.update(key)
        return np.random.default_rng(int.from_bytes(digest.digest(), "little"))

    def select(self, beliefs, instance, rng):
        scores = np.empty(instance.n_arms)
        for j, (belief, arm) in enumerate(zip(beliefs, instance.arms)):
            key = (j, _belief_key(belief))
            score = self._cache.get(key)
            if score is None:
                score = _whittle_score(belief, arm, instance.discount, self.cfg,
                                       self._index_rng(j, key[1]))
                self._cache[key] = score
            scores[j] = score
        return PolicyDecision(arm=int(np.argmax(scores)), scores=scores)
