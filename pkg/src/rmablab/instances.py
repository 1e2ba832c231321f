"""Built-in benchmark instances and a seeded random instance generator.

Three hand-specified five-arm, four-state instances exercise qualitatively
different regimes: mixed dynamics (example 1), arms whose interest decays
sharply while ignored (example 2), and a shared passive matrix that pulls
every ignored arm back toward medium interest (example 3).  State labels in
the transcribed data are 1-based, matching the published tables; they are
shifted to 0-based when the instance is built.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ArmModel, BanditInstance, Belief

# ---------------------------------------------------------------------------
# example 1: mixed dynamics, per-arm click curves, one shared passive matrix

_EX1_ACTIVE = [
    [[0.30, 0.70, 0.00, 0.00],
     [0.20, 0.30, 0.50, 0.00],
     [0.00, 0.10, 0.40, 0.50],
     [0.00, 0.00, 0.25, 0.75]],
    [[0.10, 0.90, 0.00, 0.00],
     [0.30, 0.35, 0.35, 0.00],
     [0.00, 0.25, 0.25, 0.50],
     [0.00, 0.00, 0.25, 0.75]],
    [[0.45, 0.55, 0.00, 0.00],
     [0.30, 0.30, 0.40, 0.00],
     [0.00, 0.20, 0.35, 0.45],
     [0.00, 0.00, 0.10, 0.90]],
    [[0.50, 0.50, 0.00, 0.00],
     [0.10, 0.40, 0.50, 0.00],
     [0.00, 0.30, 0.30, 0.40],
     [0.00, 0.00, 0.40, 0.60]],
    [[0.40, 0.60, 0.00, 0.00],
     [0.25, 0.35, 0.40, 0.00],
     [0.00, 0.30, 0.35, 0.35],
     [0.00, 0.00, 0.45, 0.55]],
]

_EX1_PASSIVE = [
    [0.45, 0.55, 0.00, 0.00],
    [0.15, 0.40, 0.45, 0.00],
    [0.00, 0.20, 0.30, 0.50],
    [0.00, 0.00, 0.40, 0.60],
]

_EX1_CLICK = [
    [0.10, 0.30, 0.60, 0.85],
    [0.25, 0.50, 0.50, 0.70],
    [0.20, 0.60, 0.60, 0.60],
    [0.30, 0.35, 0.55, 0.65],
    [0.25, 0.40, 0.60, 0.95],
]

# shared by all three examples
_INITIAL_BELIEFS = [
    [0.10, 0.20, 0.30, 0.40],
    [0.30, 0.25, 0.40, 0.05],
    [0.15, 0.10, 0.30, 0.45],
    [0.50, 0.10, 0.10, 0.30],
    [0.25, 0.25, 0.25, 0.25],
]

_INITIAL_STATES = [2, 1, 3, 2, 1]  # 1-based labels

# ---------------------------------------------------------------------------
# example 2: interest in an ignored arm collapses toward the low states

_EX2_ACTIVE = [
    [[0.70, 0.30, 0.00, 0.00],
     [0.00, 0.70, 0.30, 0.00],
     [0.00, 0.00, 0.70, 0.30],
     [0.00, 0.30, 0.00, 0.70]],
    [[0.90, 0.10, 0.00, 0.00],
     [0.00, 0.90, 0.10, 0.00],
     [0.00, 0.00, 0.90, 0.10],
     [0.45, 0.00, 0.45, 0.10]],
    [[0.45, 0.55, 0.00, 0.00],
     [0.30, 0.30, 0.40, 0.00],
     [0.00, 0.20, 0.35, 0.45],
     [0.90, 0.00, 0.00, 0.10]],
    [[0.50, 0.50, 0.00, 0.00],
     [0.10, 0.40, 0.50, 0.00],
     [0.00, 0.30, 0.30, 0.40],
     [0.40, 0.00, 0.40, 0.20]],
    [[0.40, 0.60, 0.00, 0.00],
     [0.25, 0.35, 0.40, 0.00],
     [0.00, 0.30, 0.35, 0.35],
     [0.00, 0.60, 0.25, 0.15]],
]

_EX2_PASSIVE = [
    [0.50, 0.50, 0.00, 0.00],
    [0.25, 0.75, 0.00, 0.00],
    [0.20, 0.80, 0.00, 0.00],
    [0.05, 0.95, 0.00, 0.00],
]

_EX2_CLICK = [
    [0.10, 0.10, 0.10, 0.85],
    [0.20, 0.20, 0.20, 0.70],
    [0.30, 0.30, 0.60, 0.60],
    [0.30, 0.35, 0.55, 0.65],
    [0.25, 0.40, 0.50, 0.60],
]

# ---------------------------------------------------------------------------
# example 3: every ignored arm resets to medium interest next step

_EX3_PASSIVE = [
    [0.00, 1.00, 0.00, 0.00],
    [0.00, 1.00, 0.00, 0.00],
    [0.00, 1.00, 0.00, 0.00],
    [0.00, 1.00, 0.00, 0.00],
]

_EX3_CLICK = [
    [0.10, 0.30, 0.60, 0.75],
    [0.25, 0.45, 0.55, 0.75],
    [0.20, 0.60, 0.60, 0.70],
    [0.30, 0.35, 0.55, 0.65],
    [0.30, 0.50, 0.60, 0.95],
]

BUILTIN_NAMES = ("example-1", "example-2", "example-3")

_BUILTIN_DATA = {
    "example-1": (_EX1_ACTIVE, _EX1_PASSIVE, _EX1_CLICK),
    "example-2": (_EX2_ACTIVE, _EX2_PASSIVE, _EX2_CLICK),
    "example-3": (_EX1_ACTIVE, _EX3_PASSIVE, _EX3_CLICK),
}


def builtin_instance(which: int | str, discount: float = 0.95) -> BanditInstance:
    """Build one of the three benchmark instances.

    ``which`` is 1, 2 or 3, or the full name such as ``"example-2"``.
    """
    name = f"example-{which}" if isinstance(which, int) else str(which)
    if name not in _BUILTIN_DATA:
        raise KeyError(f"unknown builtin instance {which!r}; choose from {BUILTIN_NAMES}")
    active, passive, click = _BUILTIN_DATA[name]
    passive_arr = np.asarray(passive, dtype=np.float64)
    arms = tuple(
        ArmModel(
            p_active=np.asarray(a, dtype=np.float64),
            p_passive=passive_arr,
            click_prob=np.asarray(c, dtype=np.float64),
        )
        for a, c in zip(active, click)
    )
    beliefs = tuple(Belief(np.asarray(b, dtype=np.float64)) for b in _INITIAL_BELIEFS)
    states = tuple(x - 1 for x in _INITIAL_STATES)
    return BanditInstance(
        arms=arms,
        initial_beliefs=beliefs,
        initial_states=states,
        discount=discount,
        name=name,
    )


@dataclass(frozen=True)
class RandomInstanceSpec:
    """Parameters for drawing a random instance.

    ``increasing_click_prob`` sorts each arm's click probabilities so that
    higher interest states pay at least as well, matching the benchmark
    convention; ``shared_passive`` gives all arms one common passive matrix.
    """

    n_arms: int = 15
    n_states: int = 4
    seed: int = 0
    increasing_click_prob: bool = True
    shared_passive: bool = True
    discount: float = 0.95


def generate_instance(spec: RandomInstanceSpec) -> BanditInstance:
    """Draw an instance from ``spec``: Dirichlet(1) rows, uniform click curves.

    Deterministic in ``spec.seed``; beliefs are Dirichlet(1), initial states
    uniform.
    """
    if spec.n_arms < 1 or spec.n_states < 2:
        raise ValueError(f"need n_arms >= 1 and n_states >= 2, got {spec}")
    rng = np.random.default_rng(spec.seed)
    s = spec.n_states

    def stochastic_matrix() -> np.ndarray:
        return rng.dirichlet(np.ones(s), size=s)

    shared = stochastic_matrix() if spec.shared_passive else None
    arms = []
    for _ in range(spec.n_arms):
        click = rng.uniform(size=s)
        if spec.increasing_click_prob:
            click = np.sort(click)
        arms.append(
            ArmModel(
                p_active=stochastic_matrix(),
                p_passive=shared if shared is not None else stochastic_matrix(),
                click_prob=click,
            )
        )
    beliefs = tuple(Belief(rng.dirichlet(np.ones(s))) for _ in range(spec.n_arms))
    states = tuple(int(x) for x in rng.integers(0, s, size=spec.n_arms))
    return BanditInstance(
        arms=tuple(arms),
        initial_beliefs=beliefs,
        initial_states=states,
        discount=spec.discount,
        name=f"random-seed{spec.seed}",
    )
