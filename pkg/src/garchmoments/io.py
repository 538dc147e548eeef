"""CSV ingestion and machine-readable run reports."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .exceptions import ParameterError


class DataKind(str, Enum):
    PRICES = "prices"
    RETURNS = "returns"


@dataclass(frozen=True, eq=False)
class InputDataset:
    source_path: str
    kind: DataKind
    column: object  # name, index, or None for auto-detection
    series: np.ndarray


def _parse_cell(text: str):
    try:
        return float(text)
    except ValueError:
        return None


def _read_csv(path):
    try:
        with open(path, newline="") as handle:
            rows = [row for row in csv.reader(handle) if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise ParameterError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ParameterError(f"{path}: empty file")
    header = None
    first = [_parse_cell(c) for c in rows[0]]
    if any(v is None for v in first):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise ParameterError(f"{path}: no data rows")
    return header, rows


def _resolve_column(header, rows, column):
    ncol = max(len(r) for r in rows)
    if column is None:
        # first column whose body is entirely numeric
        for j in range(ncol):
            if all(j < len(r) and _parse_cell(r[j]) is not None for r in rows):
                return j
        raise ParameterError("no fully numeric column found; pass an explicit column")
    if isinstance(column, int) or (isinstance(column, str) and column.lstrip("-").isdigit()):
        j = int(column)
        if not 0 <= j < ncol:
            raise ParameterError(f"column index {j} out of range (file has {ncol} columns)")
        return j
    if header is None:
        raise ParameterError(f"column {column!r} requested but the file has no header row")
    if column not in header:
        raise ParameterError(f"column {column!r} not found in header {header}")
    return header.index(column)


def ingest(path, kind: DataKind, column=None) -> InputDataset:
    """Load a numeric column from a CSV of prices or returns (percent log units).

    A header row is auto-detected; with ``column=None`` the first fully
    numeric column is used.  Prices are converted to n-1 returns as
    100 * (log p_t - log p_{t-1}).
    """
    kind = DataKind(kind)
    header, rows = _read_csv(path)
    j = _resolve_column(header, rows, column)
    values = np.empty(len(rows))
    offset = 2 if header is not None else 1  # 1-based row numbers in error messages
    for i, row in enumerate(rows):
        cell = _parse_cell(row[j]) if j < len(row) else None
        if cell is None or not np.isfinite(cell):
            raise ParameterError(f"{path}: non-numeric cell in column {j} at row {i + offset}")
        values[i] = cell
    if kind is DataKind.RETURNS:
        return InputDataset(str(path), kind, column, values)
    if values.shape[0] < 2:
        raise ParameterError(f"{path}: need at least two prices, got {values.shape[0]}")
    if np.any(values <= 0):
        bad = int(np.argmax(values <= 0))
        raise ParameterError(f"{path}: nonpositive price at row {bad + offset}")
    returns = 100.0 * np.diff(np.log(values))
    return InputDataset(str(path), kind, column, returns)


# ---------------------------------------------------------------------------
# Run reports


def _pyify(obj):
    """Convert numpy scalars/arrays to plain python for exact JSON round-trips."""
    if isinstance(obj, dict):
        return {str(k): _pyify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_pyify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_pyify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


@dataclass
class RunReport:
    """Structured, machine-readable result of one CLI invocation.

    Serializes to canonical JSON (sorted keys); ``parse(serialize(r)) == r``.
    Timing is None under deterministic runs so repeated invocations are
    byte-identical.
    """

    command: str
    config: dict
    seed: int
    version: str
    fit: dict | None = None
    bootstrap_se: dict | None = None
    tests: list = field(default_factory=list)
    sigma: dict | None = None
    timing_seconds: float | None = None

    def serialize(self) -> str:
        payload = {
            "command": self.command,
            "config": _pyify(self.config),
            "seed": int(self.seed),
            "version": self.version,
            "fit": _pyify(self.fit),
            "bootstrap_se": _pyify(self.bootstrap_se),
            "tests": _pyify(self.tests),
            "sigma": _pyify(self.sigma),
            "timing_seconds": self.timing_seconds,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @staticmethod
    def parse(text: str) -> "RunReport":
        data = json.loads(text)
        return RunReport(
            command=data["command"],
            config=data["config"],
            seed=data["seed"],
            version=data["version"],
            fit=data["fit"],
            bootstrap_se=data["bootstrap_se"],
            tests=data["tests"],
            sigma=data["sigma"],
            timing_seconds=data["timing_seconds"],
        )

    def __eq__(self, other):
        if not isinstance(other, RunReport):
            return NotImplemented
        return self.serialize() == other.serialize()
