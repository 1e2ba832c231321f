"""Exception and warning types shared across the package."""

from __future__ import annotations


class DimensionMismatchError(ValueError):
    """Inputs whose shapes must agree (belief vs. arm, arms vs. beliefs) do not."""


class ImpossibleObservationError(RuntimeError):
    """A feedback signal had zero probability under the current belief.

    The simulator only emits observations with positive probability, so
    hitting this during an episode or rollout indicates an inconsistency
    in the caller's state, not a condition to patch over.
    """


class NoCrossingInBracketError(RuntimeError):
    """Play preference never flips sign inside the subsidy bracket.

    ``side`` is ``"below"`` when passivity wins even at the lower bracket
    edge (index lies below the bracket) and ``"above"`` when play wins
    even at the upper edge.
    """

    def __init__(self, side: str, lo: float, hi: float):
        self.side = side
        self.lo = lo
        self.hi = hi
        super().__init__(
            f"play/passive value difference does not change sign on "
            f"[{lo}, {hi}] (index {side} bracket)"
        )


class TreeTooLargeError(ValueError):
    """The exact enumeration tree exceeds the configured leaf budget."""


class ConfigError(ValueError):
    """An experiment configuration failed to parse or validate."""


class NonMonotoneIndexWarning(UserWarning):
    """Estimated play-minus-passive value gap is not decreasing in the subsidy.

    Emitted by the index computation as an indexability violation signal;
    the bisection result is still returned.
    """
