"""CSV ingestion and emission helpers.

Matrices are comma-separated with one row per line.  Text after a ``#`` is
a comment; blank lines are skipped.  All numeric output is printed with 17
significant digits so that re-reading reproduces the value bit-for-bit.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError


def format_float(v):
    """Render a float with 17 significant digits."""
    return f"{float(v):.17g}"


def _parse_lines(text, name):
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError as exc:
            raise InvalidInputError(f"{name}, line {lineno}: {exc}") from None
    if not rows:
        raise InvalidInputError(f"{name}: no numeric rows found")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise InvalidInputError(f"{name}: ragged rows (expected {width} columns)")
    return np.asarray(rows, dtype=float)


def read_matrix(path):
    """Read a dense matrix from a CSV file."""
    with open(path, "r") as fh:
        return _parse_lines(fh.read(), str(path))


def read_vector(path):
    """Read a vector from a CSV file (single row, or one value per line)."""
    arr = read_matrix(path)
    if arr.shape[0] == 1:
        return arr[0].copy()
    if arr.shape[1] == 1:
        return arr[:, 0].copy()
    raise InvalidInputError(f"{path}: expected a vector, got shape {arr.shape}")


def write_matrix(path, a):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    with open(path, "w", newline="\n") as fh:
        for row in a:
            fh.write(",".join(format_float(v) for v in row) + "\n")


def write_vector(path, v):
    v = np.asarray(v, dtype=float).ravel()
    with open(path, "w", newline="\n") as fh:
        for x in v:
            fh.write(format_float(x) + "\n")
