"""Deterministic CSV emission: fixed headers, 17 significant digits."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path, header: list[str], columns: list[np.ndarray]) -> None:
    """Write columns of equal length under the given header."""
    if len(header) != len(columns):
        raise ValueError("header and column count differ")
    n = len(columns[0])
    for c in columns:
        if len(c) != n:
            raise ValueError("columns have unequal lengths")
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(format_float(c[i]) for c in columns))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> dict[str, np.ndarray]:
    """Read back a CSV written by write_csv, keyed by header name."""
    text = Path(path).read_text().strip().splitlines()
    if not text:
        raise ValueError(f"empty CSV: {path}")
    header = text[0].split(",")
    rows = [line.split(",") for line in text[1:]]
    cols = {name: np.array([float(r[j]) for r in rows]) for j, name in enumerate(header)}
    return cols
