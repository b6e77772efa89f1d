# SPDX-License-Identifier: MIT
"""Plain-text matrix files.

The first line holds ``rows cols``, then one line per row with space-separated
entries printed with 17 significant digits, which round-trips float64 exactly.
"""

from __future__ import annotations

import logging
import os
import typing as t

import numpy as np
import numpy.typing as npt

from .errors import DimensionError, InputError
from .linop import DenseOperator, as_operator

__all__ = ("format_matrix", "parse_matrix", "read_matrix", "write_matrix")

_log = logging.getLogger(__name__)

StrPath = t.Union[str, "os.PathLike[str]"]


def _format_entry(x: float) -> str:
    return f"{x:.17g}"


def format_matrix(a: npt.ArrayLike) -> str:
    a = as_operator(a)
    rows, cols = a.shape

    lines = [f"{rows} {cols}"]
    lines.extend(" ".join(_format_entry(x) for x in row) for row in a.tolist())
    return "\n".join(lines) + "\n"


def parse_matrix(text: str, *, source: str = "<string>") -> DenseOperator:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise InputError(f"{source}: empty matrix file.")

    try:
        rows, cols = (int(v) for v in lines[0].split())
    except ValueError:
        raise InputError(f"{source}: first line must be 'rows cols', got {lines[0]!r}.")

    if rows < 1 or cols < 1:
        raise DimensionError(f"{source}: matrix must be at least 1x1, header says {rows}x{cols}.")
    if len(lines) - 1 != rows:
        raise DimensionError(f"{source}: header says {rows} rows, found {len(lines) - 1}.")

    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            row = [float(v) for v in line.split()]
        except ValueError:
            raise InputError(f"{source}:{lineno}: could not parse {line!r}.")

        if len(row) != cols:
            raise DimensionError(f"{source}:{lineno}: expected {cols} entries, found {len(row)}.")
        entries.append(row)

    return as_operator(np.array(entries), name=source)


def read_matrix(path: StrPath) -> DenseOperator:
    path = os.fspath(path)

    try:
        with open(path, encoding="utf-8") as fp:
            text = fp.read()
    except OSError as e:
        raise InputError(f"could not read matrix file {path}: {e.strerror or e}")

    matrix = parse_matrix(text, source=path)
    _log.debug("Read a %dx%d matrix from %s.", *matrix.shape, path)
    return matrix


def write_matrix(path: StrPath, a: npt.ArrayLike):
    path = os.fspath(path)

    with open(path, "w", encoding="utf-8") as fp:
        fp.write(format_matrix(a))

    _log.debug("Wrote matrix to %s.", path)
