"""Domain types and the exact belief calculus for hidden-interest bandit arms.

An arm models one recommendable item: user interest follows a hidden Markov
chain over S ordered states (low, medium, high, very high for S=4) with
separate transition matrices for played and not-played steps, and a
state-dependent probability of a "like" click when played.  The planner never
sees the state; it tracks a belief vector per arm and updates it with Bayes'
rule on click feedback after a play, or with a linear drift when passive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionMismatchError, ImpossibleObservationError

STATE_NAMES_4 = ("L", "M", "H", "V")

# |sum - 1| beyond this before renormalization counts as numeric drift
DRIFT_TOL = 1e-9

_drift_warnings = 0


def drift_warning_count() -> int:
    """Number of belief updates whose pre-normalization mass drifted past tolerance."""
    return _drift_warnings


def reset_drift_warnings() -> None:
    global _drift_warnings
    _drift_warnings = 0


def _renormalized(vec: np.ndarray) -> np.ndarray:
    global _drift_warnings
    total = float(vec.sum())
    if abs(total - 1.0) > DRIFT_TOL:
        _drift_warnings += 1
    return vec / total


class Observation(Enum):
    """Feedback signal: LIKE/DISLIKE on the played arm, NONE on all others."""

    LIKE = "like"
    DISLIKE = "dislike"
    NONE = "none"


@dataclass(frozen=True, eq=False)
class Belief:
    """Probability vector over an arm's hidden interest states.

    Entries are ordered from lowest to highest interest state, must lie in
    [0, 1] and sum to 1 within 1e-9.  Stored normalized and read-only.
    """

    probs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.probs, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 2:
            raise DimensionMismatchError(
                f"belief must be a vector of >=2 probabilities, got shape {arr.shape}"
            )
        if np.any(arr < -1e-12) or np.any(arr > 1.0 + 1e-12):
            raise ValueError(f"belief entries outside [0, 1]: {arr}")
        total = float(arr.sum())
        if abs(total - 1.0) > DRIFT_TOL:
            raise ValueError(f"belief mass {total} not within {DRIFT_TOL} of 1")
        arr = np.clip(arr, 0.0, 1.0) / total
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def n_states(self) -> int:
        return self.probs.size

    def __eq__(self, other) -> bool:
        return isinstance(other, Belief) and np.array_equal(self.probs, other.probs)


def _check_stochastic(mat: np.ndarray, what: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionMismatchError(f"{what} must be square, got shape {mat.shape}")
    if np.any(mat < -1e-12) or np.any(mat > 1.0 + 1e-12):
        raise ValueError(f"{what} entries outside [0, 1]")
    rowsums = mat.sum(axis=1)
    bad = np.abs(rowsums - 1.0) > DRIFT_TOL
    if np.any(bad):
        raise ValueError(f"{what} rows {np.nonzero(bad)[0].tolist()} do not sum to 1: {rowsums[bad]}")
    mat = np.clip(mat, 0.0, 1.0)
    mat.setflags(write=False)
    return mat


@dataclass(frozen=True, eq=False)
class ArmModel:
    """One item's dynamics: play/no-play transition matrices and click probabilities.

    ``p_active`` governs the hidden state when the item is played,
    ``p_passive`` when it is not; ``click_prob[i]`` is the probability of a
    like-click (and hence of a unit reward) when played in state i.
    """

    p_active: np.ndarray
    p_passive: np.ndarray
    click_prob: np.ndarray

    def __post_init__(self):
        act = _check_stochastic(self.p_active, "p_active")
        pas = _check_stochastic(self.p_passive, "p_passive")
        rho = np.asarray(self.click_prob, dtype=np.float64)
        if rho.ndim != 1:
            raise DimensionMismatchError(f"click_prob must be a vector, got shape {rho.shape}")
        if np.any(rho < 0.0) or np.any(rho > 1.0):
            raise ValueError("click_prob entries outside [0, 1]")
        if not (act.shape[0] == pas.shape[0] == rho.size):
            raise DimensionMismatchError(
                f"inconsistent state counts: p_active {act.shape}, "
                f"p_passive {pas.shape}, click_prob {rho.shape}"
            )
        rho = rho.copy()
        rho.setflags(write=False)
        object.__setattr__(self, "p_active", act)
        object.__setattr__(self, "p_passive", pas)
        object.__setattr__(self, "click_prob", rho)

    @property
    def n_states(self) -> int:
        return self.click_prob.size

    def has_strictly_increasing_click_prob(self) -> bool:
        """Diagnostic: whether click probability strictly rises with interest.

        Higher interest paying at least as well is the modelling intent, but
        several benchmark arms tie adjacent states, so this is reported rather
        than enforced.
        """
        return bool(np.all(np.diff(self.click_prob) > 0))


@dataclass(frozen=True, eq=False)
class BanditInstance:
    """A full problem: N arms, their initial beliefs/states, and the discount.

    ``initial_states`` are 0-based internally; file formats and reports use
    1-based state and arm labels.  ``discount`` may be 0 (pure myopia) but
    must be < 1.
    """

    arms: tuple[ArmModel, ...]
    initial_beliefs: tuple[Belief, ...]
    initial_states: tuple[int, ...]
    discount: float
    name: str = ""

    # packed views used by the simulation and policy kernels
    p_active_stack: np.ndarray = field(init=False, repr=False)
    p_passive_stack: np.ndarray = field(init=False, repr=False)
    click_stack: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        arms = tuple(self.arms)
        beliefs = tuple(self.initial_beliefs)
        states = tuple(int(x) for x in self.initial_states)
        if len(arms) == 0:
            raise ValueError("instance needs at least one arm")
        s = arms[0].n_states
        if any(a.n_states != s for a in arms):
            raise DimensionMismatchError("all arms must share the same state count")
        if len(beliefs) != len(arms) or any(b.n_states != s for b in beliefs):
            raise DimensionMismatchError("need one belief of matching length per arm")
        if len(states) != len(arms) or any(not 0 <= x < s for x in states):
            raise ValueError(f"initial_states must be {len(arms)} indices in [0, {s})")
        if not 0.0 <= self.discount < 1.0:
            raise ValueError(f"discount must be in [0, 1), got {self.discount}")
        object.__setattr__(self, "arms", arms)
        object.__setattr__(self, "initial_beliefs", beliefs)
        object.__setattr__(self, "initial_states", states)
        object.__setattr__(self, "p_active_stack", np.stack([a.p_active for a in arms]))
        object.__setattr__(self, "p_passive_stack", np.stack([a.p_passive for a in arms]))
        object.__setattr__(self, "click_stack", np.stack([a.click_prob for a in arms]))

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @property
    def n_states(self) -> int:
        return self.arms[0].n_states

    def belief_matrix(self) -> np.ndarray:
        """Initial beliefs stacked as an (N, S) array."""
        return np.stack([b.probs for b in self.initial_beliefs])

    def click_prob_diagnostics(self) -> list[bool]:
        """Per-arm strict-monotonicity report for click probabilities."""
        return [a.has_strictly_increasing_click_prob() for a in self.arms]


def expected_reward(belief: Belief, arm: ArmModel) -> float:
    """Immediate expected reward of playing: sum_i belief(i) * click_prob(i)."""
    if belief.n_states != arm.n_states:
        raise DimensionMismatchError(
            f"belief has {belief.n_states} states, arm has {arm.n_states}"
        )
    return float(belief.probs @ arm.click_prob)


def belief_update_play(belief: Belief, arm: ArmModel, obs: Observation) -> Belief:
    """Bayes posterior after playing the arm and observing feedback.

    For a like, state i is weighted by click_prob(i) before pushing through
    p_active; for a dislike, by 1 - click_prob(i).  The like-case
    normalization constant equals expected_reward(belief, arm).
    """
    if belief.n_states != arm.n_states:
        raise DimensionMismatchError(
            f"belief has {belief.n_states} states, arm has {arm.n_states}"
        )
    if obs is Observation.LIKE:
        weights = belief.probs * arm.click_prob
    elif obs is Observation.DISLIKE:
        weights = belief.probs * (1.0 - arm.click_prob)
    else:
        raise ValueError("play update requires a LIKE or DISLIKE observation")
    numer = weights @ arm.p_active
    z = float(numer.sum())
    if z <= 0.0:
        raise ImpossibleObservationError(
            f"observation {obs.value} has zero probability under the current belief"
        )
    return Belief(_renormalized(numer / z))


def belief_update_passive(belief: Belief, arm: ArmModel) -> Belief:
    """Belief drift for a not-played arm: left-multiply into p_passive."""
    if belief.n_states != arm.n_states:
        raise DimensionMismatchError(
            f"belief has {belief.n_states} states, arm has {arm.n_states}"
        )
    return Belief(_renormalized(belief.probs @ arm.p_passive))
