# SPDX-License-Identifier: MIT
"""Experiment configuration.

A config file holds flat ``key = value`` lines (``#`` starts a comment). Values
given on the command line replace values from the file.

Grids accept a comma list (``0.1,0.5,1``), ``a:b:dyadic`` (``a, 2a, 4a, … ≤ b``),
``a:b:linear:k`` and ``a:b:log:k`` (``k`` points including both ends).
"""

from __future__ import annotations

import dataclasses
import logging
import math
import os
import re
import typing as t

import numpy as np

from ..applications.feedback import Nesting
from ..core.linop import NormKind
from ..splitting.schemes import Scheme
from ..splitting.stability import DEFAULT_N_GRID, DEFAULT_T_GRID
from .errors import ConfigError

__all__ = (
    "Command",
    "COMMANDS",
    "DEFAULT_NS",
    "DEFAULT_FIXTURES",
    "ExperimentConfig",
    "parse_grid",
    "parse_config_text",
    "read_config_file",
)

_log = logging.getLogger(__name__)

Command = t.Literal["convergence", "stability", "inhom", "feedback", "verify"]
COMMANDS: tuple[Command, ...] = t.get_args(Command)

DEFAULT_NS: tuple[int, ...] = (4, 8, 16, 32, 64, 128, 256)
DEFAULT_LAMBDAS: tuple[float, ...] = tuple(float(x) for x in np.geomspace(10, 1e4, 13))
DEFAULT_FIXTURES: dict[str, str] = {
    "convergence": "nilpotent2",
    "stability": "triangular",
    "inhom": "scalar",
    "feedback": "laplace1d:32",
    "verify": "random",
}

# matrix file keys: a1/a2 for generator pairs, a/gamma/b/c for boundary systems
# and blockN.aIJ for triangular generators
_MATRIX_KEY = re.compile(r"^(a1|a2|a|gamma|b|c|block[12]\.a(11|12|21|22))$")

_KEYS = frozenset(
    {
        "fixture",
        "scheme",
        "t",
        "t_grid",
        "n_grid",
        "ns",
        "norm",
        "output",
        "seed",
        "dim",
        "f1",
        "f2",
        "u0",
        "delta_s",
        "fine_factor",
        "nesting",
        "lambdas",
        "threads",
    }
)


def _parse_float(raw: str, *, key: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"expected a number, got {raw!r}.", key=key)

    if not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {raw!r}.", key=key)
    return value


def _parse_int(raw: str, *, key: str) -> int:
    value = _parse_float(raw, key=key)
    if value != int(value):
        raise ConfigError(f"expected an integer, got {raw!r}.", key=key)
    return int(value)


def parse_grid(raw: str, *, integer: bool = False, key: str = "grid") -> tuple[float, ...]:
    parse = _parse_int if integer else _parse_float
    parts = raw.strip().split(":")

    if len(parts) == 1:
        values = [parse(v.strip(), key=key) for v in raw.split(",") if v.strip()]

    elif len(parts) == 3 and parts[2] == "dyadic":
        start, stop = parse(parts[0], key=key), parse(parts[1], key=key)
        if start <= 0:
            raise ConfigError(f"a dyadic grid needs a positive start, got {start!r}.", key=key)

        values = []
        while start <= stop * (1 + 1e-12):
            values.append(start)
            start *= 2

    elif len(parts) == 4 and parts[2] in ("linear", "log"):
        start, stop = _parse_float(parts[0], key=key), _parse_float(parts[1], key=key)
        count = _parse_int(parts[3], key=key)

        if count < 1:
            raise ConfigError(f"a grid needs at least one point, got {count}.", key=key)
        if parts[2] == "log" and (start <= 0 or stop <= 0):
            raise ConfigError("a log grid needs positive ends.", key=key)

        spaced = np.linspace if parts[2] == "linear" else np.geomspace
        values = [float(v) for v in spaced(start, stop, count)]

        if integer:
            if any(abs(v - round(v)) > 1e-9 for v in values):
                raise ConfigError(f"grid {raw!r} does not land on integers.", key=key)
            values = [int(round(v)) for v in values]

    else:
        raise ConfigError(
            f"cannot parse grid {raw!r}; use a comma list, a:b:dyadic, a:b:linear:k or a:b:log:k.",
            key=key,
        )

    if not values:
        raise ConfigError(f"grid {raw!r} is empty.", key=key)

    return tuple(values)


def parse_config_text(text: str, *, source: str = "<config>") -> dict[str, str]:
    values: dict[str, str] = {}

    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue

        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"expected 'key = value', got {line!r}.", source=f"{source}:{lineno}")

        key = key.strip().replace("-", "_")
        if key in values:
            _log.warning("%s:%d: %s given twice, the later value wins.", source, lineno, key)
        values[key] = value.strip()

    return values


def read_config_file(path: str | os.PathLike[str]) -> dict[str, str]:
    path = os.fspath(path)

    try:
        with open(path, encoding="utf-8") as fp:
            text = fp.read()
    except OSError as e:
        raise ConfigError(f"could not read config file: {e.strerror or e}", source=path)

    return parse_config_text(text, source=path)


def _parse_schemes(raw: str) -> tuple[Scheme, ...]:
    names = [name.strip() for name in raw.split(",") if name.strip()]
    if names == ["all"]:
        return tuple(Scheme)

    schemes = tuple(Scheme.parse(name) for name in names)
    if not schemes:
        raise ConfigError("at least one scheme is required.", key="scheme")
    return schemes


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    command: Command
    fixture: str
    schemes: tuple[Scheme, ...] = (Scheme.SEQUENTIAL,)
    time: float = 1.0
    t_grid: tuple[float, ...] = DEFAULT_T_GRID
    n_grid: tuple[int, ...] = DEFAULT_N_GRID
    ns: tuple[int, ...] = DEFAULT_NS
    norm: NormKind = "spectral"
    output: t.Optional[str] = None
    seed: int = 0
    dim: int = 4
    matrices: t.Mapping[str, str] = dataclasses.field(default_factory=dict)
    f1: str = "const:0"
    f2: str = "const:1"
    u0: tuple[float, ...] = (1.0,)
    delta_s: t.Optional[float] = None
    fine_factor: int = 64
    nesting: Nesting = "coupling-outer"
    lambdas: tuple[float, ...] = DEFAULT_LAMBDAS
    threads: t.Optional[int] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}.")
        if self.time < 0:
            raise ConfigError(f"must be nonnegative, got {self.time!r}.", key="t")
        if any(n < 1 for n in (*self.ns, *self.n_grid)):
            raise ConfigError("step counts must be at least 1.", key="ns")
        if self.norm not in ("spectral", "l1"):
            raise ConfigError(f"expected 'spectral' or 'l1', got {self.norm!r}.", key="norm")
        if self.nesting not in ("coupling-outer", "coupling-inner"):
            raise ConfigError(f"unknown nesting {self.nesting!r}.", key="nesting")
        if self.fine_factor < 1:
            raise ConfigError(f"must be at least 1, got {self.fine_factor}.", key="fine_factor")
        if self.delta_s is not None and self.delta_s <= 0:
            raise ConfigError(f"must be positive, got {self.delta_s!r}.", key="delta_s")
        if self.threads is not None and self.threads < 0:
            raise ConfigError(f"must be nonnegative, got {self.threads}.", key="threads")

    @classmethod
    def from_mapping(cls, command: str, values: t.Mapping[str, str]) -> ExperimentConfig:
        if command not in COMMANDS:
            names = ", ".join(COMMANDS)
            raise ConfigError(f"unknown command {command!r}, expected one of {names}.")

        unknown = sorted(k for k in values if k not in _KEYS and not _MATRIX_KEY.match(k))
        if unknown:
            raise ConfigError(f"unknown key(s) {', '.join(unknown)}.")

        kwargs: dict[str, t.Any] = {
            "fixture": values.get("fixture", DEFAULT_FIXTURES[command]),
            "matrices": {k: v for k, v in sorted(values.items()) if _MATRIX_KEY.match(k)},
        }

        if "scheme" in values:
            kwargs["schemes"] = _parse_schemes(values["scheme"])
        elif command in ("convergence", "inhom", "feedback"):
            kwargs["schemes"] = tuple(Scheme)
        elif command == "stability":
            kwargs["schemes"] = (Scheme.SEQUENTIAL, Scheme.WEIGHTED)

        if "t" in values:
            kwargs["time"] = _parse_float(values["t"], key="t")
        if "t_grid" in values:
            kwargs["t_grid"] = parse_grid(values["t_grid"], key="t_grid")
        if "n_grid" in values:
            kwargs["n_grid"] = parse_grid(values["n_grid"], integer=True, key="n_grid")
        if "ns" in values:
            kwargs["ns"] = parse_grid(values["ns"], integer=True, key="ns")
        if "lambdas" in values:
            kwargs["lambdas"] = parse_grid(values["lambdas"], key="lambdas")
        if "u0" in values:
            kwargs["u0"] = parse_grid(values["u0"], key="u0")

        for key in ("seed", "dim", "fine_factor", "threads"):
            if key in values:
                kwargs[key] = _parse_int(values[key], key=key)
        if "delta_s" in values:
            kwargs["delta_s"] = _parse_float(values["delta_s"], key="delta_s")

        for key in ("norm", "output", "f1", "f2", "nesting"):
            if key in values:
                kwargs[key] = values[key]

        return cls(command=t.cast(Command, command), **kwargs)

    def echo(self) -> dict[str, t.Any]:
        return {
            "command": self.command,
            "fixture": self.fixture,
            "schemes": [s.value for s in self.schemes],
            "t": self.time,
            "t_grid": list(self.t_grid),
            "n_grid": list(self.n_grid),
            "ns": list(self.ns),
            "norm": self.norm,
            "seed": self.seed,
            "dim": self.dim,
            "matrices": dict(self.matrices),
            "f1": self.f1,
            "f2": self.f2,
            "u0": list(self.u0),
            "delta_s": self.delta_s,
            "fine_factor": self.fine_factor,
            "nesting": self.nesting,
            "lambdas": list(self.lambdas),
        }
