# SPDX-License-Identifier: MIT
"""Inhomogeneities sampled on a uniform grid ``{0, Δs, …, τ_max}``.

Values between nodes are linear interpolants; beyond ``τ_max`` the function is 0.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import os
import typing as t

import numpy as np
import numpy.typing as npt
from typing_extensions import Self

from ..core.errors import DimensionError, InputError
from ..core.linop import State, Time, as_state
from .errors import DiscretizationError

__all__ = (
    "GridNorm",
    "GridFunction",
    "grid_offset",
    "shift_apply",
    "delta0",
    "read_grid_function",
    "write_grid_function",
)

_log = logging.getLogger(__name__)

GridNorm = t.Literal["sup", "l1"]
StrPath = t.Union[str, "os.PathLike[str]"]

ON_GRID_TOL = 1e-9


def grid_offset(time: Time, delta_s: float) -> t.Optional[int]:
    """``time/Δs`` when it is an integer (within ``1e-9``), else ``None``."""
    ratio = time / delta_s
    nearest = round(ratio)
    return int(nearest) if abs(ratio - nearest) <= ON_GRID_TOL else None


@dataclasses.dataclass(frozen=True)
class GridFunction:
    values: npt.NDArray[np.float64]
    delta_s: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]

        if values.ndim != 2 or values.shape[0] < 2 or values.shape[1] < 1:
            raise DimensionError(
                f"grid function needs at least 2 nodes of a nonempty state, got {values.shape}."
            )
        if not np.all(np.isfinite(values)):
            raise InputError("grid function has non-finite values.")
        if not (math.isfinite(self.delta_s) and self.delta_s > 0):
            raise InputError(f"grid spacing must be positive, got {self.delta_s!r}.")

        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "delta_s", float(self.delta_s))

    def __repr__(self):
        return f"<GridFunction count={self.count} delta_s={self.delta_s:g} dim={self.dim}>"

    @property
    def count(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def tau_max(self) -> float:
        return (self.count - 1) * self.delta_s

    @property
    def nodes(self) -> npt.NDArray[np.float64]:
        return np.arange(self.count) * self.delta_s

    @classmethod
    def zeros(cls, count: int, delta_s: float, dim: int) -> Self:
        return cls(np.zeros((count, dim)), delta_s)

    @classmethod
    def from_callable(
        cls, func: t.Callable[[float], npt.ArrayLike], count: int, delta_s: float, dim: int
    ) -> Self:
        values = np.empty((count, dim))
        for j in range(count):
            values[j] = np.broadcast_to(np.asarray(func(j * delta_s), dtype=np.float64), (dim,))

        return cls(values, delta_s)

    @classmethod
    def builtin(cls, spec: str, count: int, delta_s: float, dim: int) -> Self:
        """``const:c``, ``ramp`` (``f(s) = s``) or ``sine:freq`` (``sin 2π·freq·s``)."""
        name, _, arg = spec.strip().partition(":")

        try:
            if name == "const":
                c = float(arg) if arg else 1.0
                return cls.from_callable(lambda s: c, count, delta_s, dim)
            if name == "ramp":
                return cls.from_callable(lambda s: s, count, delta_s, dim)
            if name == "sine":
                freq = float(arg) if arg else 1.0
                return cls.from_callable(
                    lambda s: math.sin(2 * math.pi * freq * s), count, delta_s, dim
                )
        except ValueError:
            raise InputError(f"could not parse the argument of grid function {spec!r}.")

        raise InputError(f"unknown grid function {spec!r}, expected const:c, ramp or sine:freq.")

    def compatible(self, other: GridFunction) -> bool:
        return (self.count, self.dim) == (other.count, other.dim) and math.isclose(
            self.delta_s, other.delta_s, rel_tol=1e-12
        )

    def _require_compatible(self, other: GridFunction):
        if not self.compatible(other):
            raise DiscretizationError(f"grid functions {self!r} and {other!r} do not share a grid.")

    def __add__(self, other: GridFunction) -> GridFunction:
        if not isinstance(other, GridFunction):
            return NotImplemented

        self._require_compatible(other)
        return GridFunction(self.values + other.values, self.delta_s)

    def at(self, s: float | npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Linear interpolant at ``s`` (scalar or 1-d), 0 beyond ``τ_max``."""
        points = np.atleast_1d(np.asarray(s, dtype=np.float64))
        if np.any(points < 0):
            raise InputError("grid functions are defined for s >= 0 only.")

        # snap points that sit on the last node up to rounding
        near_end = np.abs(points - self.tau_max) <= ON_GRID_TOL * self.delta_s
        points = np.where(near_end, self.tau_max, points)

        nodes = self.nodes
        out = np.column_stack(
            [np.interp(points, nodes, self.values[:, c], right=0.0) for c in range(self.dim)]
        )
        return out[0] if np.ndim(s) == 0 else out

    def shift(self, time: Time) -> GridFunction:
        if not math.isfinite(time) or time < 0:
            raise InputError(f"shift must be finite and nonnegative, got {time!r}.")

        offset = grid_offset(time, self.delta_s)

        if offset is not None:
            values = np.zeros_like(self.values)
            if offset < self.count:
                values[: self.count - offset] = self.values[offset:]
            return GridFunction(values, self.delta_s)

        return GridFunction(self.at(self.nodes + time), self.delta_s)

    def refine(self, factor: int) -> GridFunction:
        """Resample the interpolant on ``Δs/factor``; the horizon is unchanged."""
        if factor < 1:
            raise InputError(f"refinement factor must be at least 1, got {factor}.")
        if factor == 1:
            return self

        delta_s = self.delta_s / factor
        nodes = np.arange((self.count - 1) * factor + 1) * delta_s
        return GridFunction(self.at(nodes), delta_s)

    def norm(self, kind: GridNorm = "sup") -> float:
        if kind == "sup":
            return float(np.abs(self.values).max())
        if kind == "l1":
            return float(self.delta_s * np.abs(self.values).sum())

        raise InputError(f"unknown grid norm {kind!r}, expected 'sup' or 'l1'.")

    def stacked(self) -> npt.NDArray[np.float64]:
        return self.values.reshape(-1)


def shift_apply(f: GridFunction, time: Time) -> GridFunction:
    """``(L(t)f)(s) = f(s + t)``; integer multiples of ``Δs`` move nodes exactly."""
    return f.shift(time)


def delta0(f: GridFunction) -> State:
    return as_state(f.values[0].copy())


def _parse_grid_function(text: str, *, source: str) -> GridFunction:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise InputError(f"{source}: empty grid function file.")

    header = lines[0].split()
    try:
        count, delta_s, dim = int(header[0]), float(header[1]), int(header[2])
    except (ValueError, IndexError):
        raise InputError(f"{source}: first line must be 'count delta_s dim', got {lines[0]!r}.")

    if len(lines) - 1 != count:
        raise DimensionError(f"{source}: header says {count} nodes, found {len(lines) - 1}.")

    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            row = [float(v) for v in line.split()]
        except ValueError:
            raise InputError(f"{source}:{lineno}: could not parse {line!r}.")

        if len(row) != dim:
            raise DimensionError(f"{source}:{lineno}: expected {dim} values, found {len(row)}.")
        values.append(row)

    return GridFunction(np.array(values), delta_s)


def read_grid_function(path: StrPath) -> GridFunction:
    path = os.fspath(path)

    try:
        with open(path, encoding="utf-8") as fp:
            text = fp.read()
    except OSError as e:
        raise InputError(f"could not read grid function file {path}: {e.strerror or e}")

    f = _parse_grid_function(text, source=path)
    _log.debug("Read %r from %s.", f, path)
    return f


def write_grid_function(path: StrPath, f: GridFunction):
    lines = [f"{f.count} {f.delta_s:.17g} {f.dim}"]
    lines.extend(" ".join(f"{x:.17g}" for x in row) for row in f.values.tolist())

    with open(os.fspath(path), "w", encoding="utf-8") as fp:
        fp.write("\n".join(lines) + "\n")
