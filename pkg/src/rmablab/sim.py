"""Ground-truth simulation and evaluation.

The environment tracks the true hidden interest state of every arm; the
planner side of an episode only ever sees beliefs and click feedback.  Also
here: two exact enumeration oracles used to validate the Monte Carlo
machinery on small instances, one for the true process and one for the
belief-space rollout returns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    BanditInstance,
    Belief,
    Observation,
    belief_update_passive,
    belief_update_play,
    expected_reward,
)
from .errors import TreeTooLargeError
from .policies import Policy

_ORACLE_LEAF_BUDGET = 1_000_000


@dataclass
class EnvState:
    """True hidden states, step counter, and the environment's noise stream."""

    hidden_states: np.ndarray
    step: int
    rng: np.random.Generator


def env_step(env: EnvState, instance: BanditInstance,
             arm: int) -> tuple[int, Observation, EnvState]:
    """Advance the true process one step given the played arm.

    Reward is 1 with the played arm's current-state click probability and the
    observation is Like exactly when the reward is 1.  Every arm then
    transitions: the played one through its active matrix, the rest through
    their passive matrices.  Draw order is fixed (one reward uniform, then N
    transition uniforms) so episodes are reproducible.
    """
    if not 0 <= arm < instance.n_arms:
        raise ValueError(f"arm {arm} out of range")
    n = instance.n_arms
    state = int(env.hidden_states[arm])
    reward = 1 if env.rng.random() < instance.click_stack[arm, state] else 0
    obs = Observation.LIKE if reward else Observation.DISLIKE
    rows = instance.p_passive_stack[np.arange(n), env.hidden_states]
    rows[arm] = instance.p_active_stack[arm, state]
    cum = np.cumsum(rows, axis=1)
    u = env.rng.random(n)
    nxt = np.minimum((cum <= u[:, None]).sum(axis=1), instance.n_states - 1)
    return reward, obs, EnvState(nxt.astype(np.int64), env.step + 1, env.rng)


@dataclass(frozen=True)
class StepRecord:
    """Trace entry for one step: action, feedback, and the post-step state."""

    t: int
    arm_played: int
    observation: Observation
    reward: int
    beliefs_after: tuple[Belief, ...]
    hidden_after: tuple[int, ...]


def run_episode(instance: BanditInstance, policy: Policy, steps: int,
                seed: int) -> tuple[float, list[StepRecord]]:
    """Simulate one episode of ``steps`` decisions from the initial condition.

    Environment and policy randomness come from two independent substreams of
    ``seed``, so the whole trace is a pure function of (instance, policy,
    steps, seed).  Returns the discounted return and the per-step trace.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    env_seq, policy_seq = np.random.SeedSequence(seed).spawn(2)
    env = EnvState(np.array(instance.initial_states, dtype=np.int64), 0,
                   np.random.default_rng(env_seq))
    policy_rng = np.random.default_rng(policy_seq)
    beliefs = list(instance.initial_beliefs)
    total = 0.0
    df = 1.0
    records: list[StepRecord] = []
    for t in range(1, steps + 1):
        try:
            decision = policy.select(beliefs, instance, policy_rng)
        except Exception as err:
            raise RuntimeError(
                f"policy {policy.name!r} failed at step {t} (episode seed {seed})"
            ) from err
        arm = decision.arm
        reward, obs, env = env_step(env, instance, arm)
        beliefs = [
            belief_update_play(b, a, obs) if j == arm else belief_update_passive(b, a)
            for j, (b, a) in enumerate(zip(beliefs, instance.arms))
        ]
        total += df * reward
        df *= instance.discount
        records.append(StepRecord(
            t=t, arm_played=arm, observation=obs, reward=reward,
            beliefs_after=tuple(beliefs),
            hidden_after=tuple(int(x) for x in env.hidden_states),
        ))
    return total, records


@dataclass(frozen=True, eq=False)
class EvalReport:
    """Aggregate statistics for one policy over many independent episodes."""

    policy_name: str
    episodes: int
    steps_per_episode: int
    mean_discounted_return: float
    stderr: float
    ci95_lo: float
    ci95_hi: float
    per_arm_play_frequency: np.ndarray
    cumulative_discounted_curve: np.ndarray
    curve_ci_lo: np.ndarray
    curve_ci_hi: np.ndarray


def evaluate(instance: BanditInstance, policy: Policy, episodes: int, steps: int,
             base_seed: int, on_episode=None) -> EvalReport:
    """Run ``episodes`` independent episodes (seeds base_seed+k) and aggregate.

    ``on_episode(k, records)`` is called after each episode when given, which
    is how trace export hooks in without holding every trace in memory.
    """
    if episodes < 1:
        raise ValueError(f"episodes must be >= 1, got {episodes}")
    n = instance.n_arms
    returns = np.empty(episodes)
    curves = np.empty((episodes, steps))
    counts = np.zeros(n)
    weights = instance.discount ** np.arange(steps)
    for k in range(episodes):
        total, records = run_episode(instance, policy, steps, base_seed + k)
        returns[k] = total
        rewards = np.fromiter((rec.reward for rec in records), float, count=steps)
        curves[k] = np.cumsum(rewards * weights)
        for rec in records:
            counts[rec.arm_played] += 1
        if on_episode is not None:
            on_episode(k, records)
    mean = float(returns.mean())
    if episodes > 1:
        stderr = float(returns.std(ddof=1) / np.sqrt(episodes))
        curve_se = curves.std(axis=0, ddof=1) / np.sqrt(episodes)
    else:
        stderr = 0.0
        curve_se = np.zeros(steps)
    curve_mean = curves.mean(axis=0)
    return EvalReport(
        policy_name=policy.name,
        episodes=episodes,
        steps_per_episode=steps,
        mean_discounted_return=mean,
        stderr=stderr,
        ci95_lo=mean - 1.96 * stderr,
        ci95_hi=mean + 1.96 * stderr,
        per_arm_play_frequency=counts / (episodes * steps),
        cumulative_discounted_curve=curve_mean,
        curve_ci_lo=curve_mean - 1.96 * curve_se,
        curve_ci_hi=curve_mean + 1.96 * curve_se,
    )


def _push_joint(joint: np.ndarray, axis: int, matrix: np.ndarray) -> np.ndarray:
    """Apply one arm's transition matrix to the joint hidden-state tensor."""
    return np.moveaxis(np.tensordot(joint, matrix, axes=(axis, 0)), -1, axis)


def exact_value_oracle(instance: BanditInstance, policy: Policy, steps: int) -> float:
    """Exact expected discounted return of a deterministic belief-based policy.

    Branches only on the two observations per step while pushing the joint
    distribution of all hidden states forward analytically, so the work is
    about 2^steps tensors of S^N entries; both factors are guarded.  The
    policy must depend only on the belief history (it is queried with a fixed
    throwaway stream), which mirrors how beliefs evolve in simulation.
    """
    n, s = instance.n_arms, instance.n_states
    if 2 ** steps * s ** n > _ORACLE_LEAF_BUDGET:
        raise TreeTooLargeError(
            f"2^{steps} branches x {s}^{n} joint states exceeds the "
            f"{_ORACLE_LEAF_BUDGET:,}-leaf budget"
        )
    joint0 = np.zeros((s,) * n)
    joint0[tuple(instance.initial_states)] = 1.0

    def weight_shape(axis: int) -> tuple[int, ...]:
        shape = [1] * n
        shape[axis] = s
        return tuple(shape)

    def recurse(beliefs: list[Belief], joint: np.ndarray, remaining: int) -> float:
        decision = policy.select(beliefs, instance, np.random.default_rng(0))
        arm = decision.arm
        click = instance.arms[arm].click_prob
        p_like = float(np.tensordot(joint, click, axes=(arm, 0)).sum())
        value = p_like
        if remaining == 1:
            return value
        branches = (
            (Observation.LIKE, p_like, click),
            (Observation.DISLIKE, 1.0 - p_like, 1.0 - click),
        )
        for obs, p_obs, weights in branches:
            if p_obs <= 1e-15:
                continue
            cond = joint * weights.reshape(weight_shape(arm)) / p_obs
            for j in range(n):
                matrix = (instance.arms[j].p_active if j == arm
                          else instance.arms[j].p_passive)
                cond = _push_joint(cond, j, matrix)
            next_beliefs = [
                belief_update_play(b, a, obs) if j == arm else belief_update_passive(b, a)
                for j, (b, a) in enumerate(zip(beliefs, instance.arms))
            ]
            value += instance.discount * p_obs * recurse(next_beliefs, cond, remaining - 1)
        return value

    return recurse(list(instance.initial_beliefs), joint0, steps)


def exact_forced_return(beliefs: list[Belief], first_action: int,
                        instance: BanditInstance, horizon: int,
                        base_policy: str = "myopic") -> float:
    """Exact expectation of the forced-first-action belief-space rollout.

    Enumerates every like/dislike branch (weighted by the belief-side
    probabilities the rollout samples from) over ``horizon`` total steps, and
    for a uniform-random base policy additionally averages over actions.
    Validates rollout estimates on small instances.
    """
    n = instance.n_arms
    per_step = 2 * (n if base_policy == "random" else 1)
    if per_step ** horizon > _ORACLE_LEAF_BUDGET:
        raise TreeTooLargeError(
            f"{per_step}^{horizon} rollout branches exceed the "
            f"{_ORACLE_LEAF_BUDGET:,}-leaf budget"
        )

    def play_value(blist: list[Belief], arm: int, remaining: int) -> float:
        r = expected_reward(blist[arm], instance.arms[arm])
        if remaining == 1:
            return r
        value = r
        for obs, p_obs in ((Observation.LIKE, r), (Observation.DISLIKE, 1.0 - r)):
            if p_obs <= 1e-15:
                continue
            nxt = [
                belief_update_play(b, a, obs) if j == arm else belief_update_passive(b, a)
                for j, (b, a) in enumerate(zip(blist, instance.arms))
            ]
            value += instance.discount * p_obs * continuation(nxt, remaining - 1)
        return value

    def continuation(blist: list[Belief], remaining: int) -> float:
        if base_policy == "random":
            return sum(play_value(blist, a, remaining) for a in range(n)) / n
        scores = [expected_reward(b, a) for b, a in zip(blist, instance.arms)]
        return play_value(blist, int(np.argmax(scores)), remaining)

    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    return play_value(list(beliefs), first_action, horizon)
