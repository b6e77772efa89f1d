# SPDX-License-Identifier: MIT
"""Sequential, Strang and weighted product formulas."""

from __future__ import annotations

import csv
import dataclasses
import enum
import logging
import typing as t

import numpy as np
import numpy.typing as npt

from ..core.errors import DimensionError, InputError
from ..core.linop import (
    DenseOperator,
    EvolutionFamily,
    NormKind,
    Time,
    as_operator,
    operator_norm,
)
from ..internal.async_utils import run_parallel
from .errors import DegenerateFitError, SchemeError

__all__ = (
    "ROUNDING_FLOOR",
    "Scheme",
    "split_step",
    "split_evolve",
    "step_family",
    "OrderFit",
    "fit_order",
    "ConvergenceReport",
    "convergence_study",
)

_log = logging.getLogger(__name__)

ROUNDING_FLOOR = 1e-14
MIN_FIT_POINTS = 3


class Scheme(enum.Enum):
    SEQUENTIAL = "sequential"
    STRANG = "strang"
    WEIGHTED = "weighted"

    @classmethod
    def parse(cls, raw: str | Scheme) -> Scheme:
        if isinstance(raw, cls):
            return raw

        key = str(raw).strip().lower()
        aliases = {"lie": cls.SEQUENTIAL, "trotter": cls.SEQUENTIAL}

        if key in aliases:
            return aliases[key]

        try:
            return cls(key)
        except ValueError:
            names = ", ".join(s.value for s in cls)
            raise SchemeError(f"unknown scheme {raw!r}, expected one of {names}.")


def _check_pair(f1: EvolutionFamily, f2: EvolutionFamily):
    if f1.dim != f2.dim:
        raise DimensionError(f"families act on different spaces: {f1.dim} vs {f2.dim}.")


def split_step(scheme: Scheme, f1: EvolutionFamily, f2: EvolutionFamily, h: Time) -> DenseOperator:
    _check_pair(f1, f2)

    if scheme is Scheme.SEQUENTIAL:
        return f2(h) @ f1(h)
    if scheme is Scheme.STRANG:
        half = f1(h / 2)
        return half @ f2(h) @ half
    if scheme is Scheme.WEIGHTED:
        return (f1(h) @ f2(h) + f2(h) @ f1(h)) / 2

    raise SchemeError(f"unsupported scheme {scheme!r}.")


def split_evolve(
    scheme: Scheme, f1: EvolutionFamily, f2: EvolutionFamily, time: Time, n: int
) -> DenseOperator:
    """``split_step(t/n)^n``, accumulated left to right."""
    if n < 1:
        raise InputError(f"step count must be at least 1, got {n}.")
    if time < 0:
        raise InputError(f"time must be nonnegative, got {time}.")

    step = split_step(scheme, f1, f2, time / n)

    result = step
    for _ in range(n - 1):
        result = result @ step

    return result


def step_family(scheme: Scheme, f1: EvolutionFamily, f2: EvolutionFamily) -> EvolutionFamily:
    """The one-step map ``h ↦ split_step(h)``; not a semigroup in general."""
    _check_pair(f1, f2)

    return EvolutionFamily(
        f1.dim,
        lambda h: split_step(scheme, f1, f2, h),
        label=f"{scheme.value}({f1.label},{f2.label})",
    )


@dataclasses.dataclass(frozen=True)
class OrderFit:
    order: float
    residual: float
    used: int


def fit_order(
    ns: t.Sequence[int],
    errors: t.Sequence[float],
    *,
    floor: float = ROUNDING_FLOOR,
    minimum: int = MIN_FIT_POINTS,
) -> OrderFit:
    """Negative slope of the least-squares line through ``(log n, log error)``."""
    points = [(n, e) for n, e in zip(ns, errors) if e >= floor]

    if len(points) < len(ns):
        _log.warning(
            "%d error(s) fell below the rounding floor %g and were excluded from the fit.",
            len(ns) - len(points),
            floor,
        )

    if len(points) < minimum:
        raise DegenerateFitError(len(points), minimum, floor=floor)

    x = np.log([n for n, _ in points])
    y = np.log([e for _, e in points])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.abs(y - (slope * x + intercept)).max())

    return OrderFit(order=float(-slope), residual=residual, used=len(points))


@dataclasses.dataclass(frozen=True)
class ConvergenceReport:
    scheme: Scheme
    t_final: Time
    pairs: tuple[tuple[int, float], ...]
    fitted_order: float
    fit_residual: float

    CSV_HEADER: t.ClassVar[tuple[str, ...]] = (
        "scheme",
        "t",
        "n",
        "error",
        "fitted_order",
        "fit_residual",
    )

    @property
    def ns(self) -> list[int]:
        return [n for n, _ in self.pairs]

    @property
    def errors(self) -> list[float]:
        return [e for _, e in self.pairs]

    def rows(self) -> list[tuple[str, ...]]:
        return [
            (
                self.scheme.value,
                repr(float(self.t_final)),
                str(n),
                repr(float(error)),
                repr(float(self.fitted_order)),
                repr(float(self.fit_residual)),
            )
            for n, error in self.pairs
        ]

    def write_csv(self, fp: t.TextIO, *, header: bool = True):
        writer = csv.writer(fp, lineterminator="\n")

        if header:
            writer.writerow(self.CSV_HEADER)
        writer.writerows(self.rows())

    def to_json(self) -> dict[str, t.Any]:
        return {
            "scheme": self.scheme.value,
            "t": self.t_final,
            "pairs": [{"n": n, "error": e} for n, e in self.pairs],
            "fitted_order": self.fitted_order,
            "fit_residual": self.fit_residual,
        }


def _validate_ns(ns: t.Sequence[int]) -> tuple[int, ...]:
    ns = tuple(int(n) for n in ns)

    if len(ns) < MIN_FIT_POINTS:
        raise InputError(f"a convergence study needs at least {MIN_FIT_POINTS} step counts.")
    if ns[0] < 1 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise InputError(f"step counts must be positive and strictly increasing, got {ns}.")

    return ns


def convergence_study(
    scheme: Scheme,
    f1: EvolutionFamily,
    f2: EvolutionFamily,
    reference: npt.ArrayLike,
    time: Time,
    ns: t.Sequence[int],
    *,
    norm: NormKind = "spectral",
    floor: float = ROUNDING_FLOOR,
    threads: t.Optional[int] = None,
) -> ConvergenceReport:
    ns = _validate_ns(ns)
    reference = as_operator(reference, name="reference")

    if reference.shape != (f1.dim, f1.dim):
        raise DimensionError(f"reference has shape {reference.shape}, expected side {f1.dim}.")

    def error_at(n: int) -> float:
        return operator_norm(split_evolve(scheme, f1, f2, time, n) - reference, norm=norm)

    errors = run_parallel(error_at, ns, threads=threads)
    fit = fit_order(ns, errors, floor=floor)

    _log.info(
        "%s splitting at t=%g: fitted order %.4f (residual %.2e) over n=%d..%d.",
        scheme.value,
        time,
        fit.order,
        fit.residual,
        ns[0],
        ns[-1],
    )

    return ConvergenceReport(
        scheme=scheme,
        t_final=float(time),
        pairs=tuple(zip(ns, (float(e) for e in errors))),
        fitted_order=fit.order,
        fit_residual=fit.residual,
    )
