"""Figure rendering.

Styling is deterministic: colors derive from the policy name alone and
saved files carry fixed metadata (no timestamps), so rendering the same
input twice gives byte-identical output.
"""

from __future__ import annotations

import colorsys
import hashlib
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .curves import CurveSet, FrequencyTable


def policy_color(name: str) -> tuple[float, float, float]:
    """Stable RGB color hashed from the policy name."""
    digest = hashlib.blake2b(name.encode(), digest_size=4).digest()
    hue = int.from_bytes(digest, "big") / 2**32
    return colorsys.hsv_to_rgb(hue, 0.65, 0.78)


def _save(fig, out: str | Path) -> Path:
    out = Path(out)
    suffix = out.suffix.lower()
    metadata: dict = {}
    if suffix == ".png":
        metadata = {"Software": "plotkit"}
    elif suffix == ".svg":
        metadata = {"Date": None}
    fig.savefig(out, dpi=150, metadata=metadata)
    plt.close(fig)
    return out


def render_comparison(curves: CurveSet, out: str | Path,
                      title: str | None = None) -> Path:
    """One line plus a shaded CI band per policy, legend, labeled axes."""
    if not curves.curves:
        raise ValueError("need at least one policy curve")
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for c in curves.curves:
        color = policy_color(c.policy)
        ax.plot(c.steps, c.mean, label=c.policy, color=color, linewidth=1.8)
        ax.fill_between(c.steps, c.ci_lo, c.ci_hi, color=color, alpha=0.2,
                        linewidth=0)
    ax.set_xlabel("step")
    ax.set_ylabel("cumulative discounted reward")
    if title:
        ax.set_title(title)
    ax.legend(loc="lower right")
    ax.grid(alpha=0.25)
    fig.tight_layout()
    return _save(fig, out)


def render_frequencies(table: FrequencyTable, out: str | Path,
                       title: str | None = None) -> Path:
    """Grouped play-frequency bars, one group per arm, one bar per policy."""
    if not table.policies:
        raise ValueError("need at least one policy row")
    n_pol, n_arms = table.frequencies.shape
    x = np.arange(1, n_arms + 1, dtype=np.float64)
    width = 0.8 / n_pol
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    for k, name in enumerate(table.policies):
        offset = (k - (n_pol - 1) / 2.0) * width
        ax.bar(x + offset, table.frequencies[k], width=width, label=name,
               color=policy_color(name))
    ax.set_xlabel("item")
    ax.set_ylabel("play frequency")
    ax.set_xticks(x.astype(np.int64))
    ax.set_ylim(0.0, 1.0)
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right")
    fig.tight_layout()
    return _save(fig, out)
