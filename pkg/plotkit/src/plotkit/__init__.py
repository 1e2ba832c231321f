"""Figure rendering for bandit harness CSV outputs."""

from .curves import (
    CURVE_COLUMNS,
    CurveSet,
    FrequencyTable,
    PolicyCurve,
    SchemaError,
    load_curves,
    load_frequencies,
)
from .render import policy_color, render_comparison, render_frequencies

__version__ = "0.1.0"

__all__ = [
    "CURVE_COLUMNS",
    "CurveSet",
    "FrequencyTable",
    "PolicyCurve",
    "SchemaError",
    "load_curves",
    "load_frequencies",
    "policy_color",
    "render_comparison",
    "render_frequencies",
    "__version__",
]
