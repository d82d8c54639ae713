"""Deterministic CSV/JSON emission shared by every module."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def write_columns(path: str | Path, header: list[str], columns) -> None:
    """Write equal-length numeric columns as CSV with round-trippable floats."""
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, data, fmt="%.17g", delimiter=",")


def read_columns(path: str | Path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}


def write_json(path: str | Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
