"""Parsers for the harness result files.

Both loaders match columns by name, so header order in the CSV does not
matter.  Anything off-schema raises SchemaError naming the file, line, and
column involved.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CURVE_COLUMNS = ("policy", "step", "cum_mean", "cum_ci_lo", "cum_ci_hi")
# result files carry 6 decimal places; permit one unit of rounding slack
# when checking that the confidence bounds bracket the mean
_ROUND_SLACK = 2e-6


class SchemaError(ValueError):
    """The input file does not match the documented CSV schema."""


@dataclass(frozen=True)
class PolicyCurve:
    """One policy's cumulative discounted reward series with CI bounds."""

    policy: str
    steps: np.ndarray
    mean: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray


@dataclass(frozen=True)
class CurveSet:
    curves: tuple[PolicyCurve, ...]

    @property
    def policies(self) -> tuple[str, ...]:
        return tuple(c.policy for c in self.curves)


@dataclass(frozen=True)
class FrequencyTable:
    """Per-policy play frequencies, one row per policy, one column per arm."""

    policies: tuple[str, ...]
    frequencies: np.ndarray


def _read_rows(path: str | Path) -> tuple[list[dict], list[str]]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise SchemaError(f"{path}: empty file, no header row")
            return list(reader), list(reader.fieldnames)
    except OSError as err:
        raise SchemaError(f"cannot read {path}: {err}") from None


def _cell_float(row: dict, col: str, where: str) -> float:
    raw = row.get(col)
    if raw is None or raw == "":
        raise SchemaError(f"{where}: missing value in column {col!r}")
    try:
        return float(raw)
    except ValueError:
        raise SchemaError(
            f"{where}: column {col!r} holds non-numeric value {raw!r}"
        ) from None


def load_curves(path: str | Path) -> CurveSet:
    """Parse a per-step curves CSV into one PolicyCurve per policy."""
    rows, fieldnames = _read_rows(path)
    missing = [c for c in CURVE_COLUMNS if c not in fieldnames]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    by_policy: dict[str, list] = {}
    for lineno, row in enumerate(rows, start=2):
        where = f"{path} line {lineno}"
        name = row.get("policy") or ""
        if not name:
            raise SchemaError(f"{where}: empty policy name")
        step = _cell_float(row, "step", where)
        if step != int(step) or step < 1:
            raise SchemaError(
                f"{where}: step must be a positive integer, got {row['step']!r}")
        mean = _cell_float(row, "cum_mean", where)
        lo = _cell_float(row, "cum_ci_lo", where)
        hi = _cell_float(row, "cum_ci_hi", where)
        if lo > mean + _ROUND_SLACK or mean > hi + _ROUND_SLACK:
            raise SchemaError(
                f"{where}: confidence bounds [{lo}, {hi}] do not bracket {mean}")
        by_policy.setdefault(name, []).append((int(step), mean, lo, hi))

    curves = []
    for name, data in by_policy.items():
        arr = np.asarray(data, dtype=np.float64)
        steps = arr[:, 0].astype(np.int64)
        if steps.size > 1 and np.any(np.diff(steps) <= 0):
            raise SchemaError(
                f"{path}: steps for policy {name!r} are not strictly increasing")
        curves.append(PolicyCurve(policy=name, steps=steps, mean=arr[:, 1],
                                  ci_lo=arr[:, 2], ci_hi=arr[:, 3]))
    return CurveSet(curves=tuple(curves))


def load_frequencies(path: str | Path) -> FrequencyTable:
    """Parse a results CSV, keeping the policy names and freq_arm<k> columns."""
    rows, fieldnames = _read_rows(path)
    if "policy" not in fieldnames:
        raise SchemaError(f"{path}: missing column 'policy'")
    numbered = []
    for col in fieldnames:
        m = re.fullmatch(r"freq_arm(\d+)", col)
        if m:
            numbered.append((int(m.group(1)), col))
    numbered.sort()
    if not numbered:
        raise SchemaError(f"{path}: no freq_arm<k> columns")
    if [k for k, _ in numbered] != list(range(1, len(numbered) + 1)):
        raise SchemaError(
            f"{path}: freq_arm columns are not contiguous from 1: "
            f"{[c for _, c in numbered]}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")

    names: list[str] = []
    mat = []
    for lineno, row in enumerate(rows, start=2):
        where = f"{path} line {lineno}"
        name = row.get("policy") or ""
        if not name:
            raise SchemaError(f"{where}: empty policy name")
        if name in names:
            raise SchemaError(f"{where}: duplicate policy {name!r}")
        vals = [_cell_float(row, col, where) for _, col in numbered]
        if any(v < 0.0 or v > 1.0 for v in vals):
            raise SchemaError(f"{where}: frequencies outside [0, 1]")
        if abs(sum(vals) - 1.0) > 1e-3:
            raise SchemaError(
                f"{where}: frequencies sum to {sum(vals):.6f}, expected 1")
        names.append(name)
        mat.append(vals)
    return FrequencyTable(policies=tuple(names),
                          frequencies=np.asarray(mat, dtype=np.float64))
