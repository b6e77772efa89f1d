# SPDX-License-Identifier: MIT
"""Dense linear-algebra substrate.

States are 1-d float arrays, operators are 2-d float arrays. Everything here is
a pure function of its inputs; family values are handed out read-only.
"""

from __future__ import annotations

import dataclasses
import functools
import logging
import math
import typing as t

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .errors import DimensionError, InputError, NumericalError, StructuralError
from .reports import IdentityReport

__all__ = (
    "Time",
    "State",
    "DenseOperator",
    "NormKind",
    "TOL_IDENTITY",
    "TOL_SEMIGROUP",
    "as_operator",
    "as_state",
    "identity",
    "expm",
    "operator_norm",
    "relative_deviation",
    "spectral_bound",
    "EvolutionFamily",
    "semigroup_family_from_generator",
    "identity_family",
    "nilpotent_family",
    "GrowthBound",
    "check_semigroup_law",
    "check_nilpotent_exponential",
)

_log = logging.getLogger(__name__)

Time = float
State = npt.NDArray[np.float64]
DenseOperator = npt.NDArray[np.float64]
NormKind = t.Literal["spectral", "l1"]

TOL_IDENTITY = 1e-12
TOL_SEMIGROUP = 1e-9

_FAMILY_CACHE_SIZE = 256


def as_operator(a: npt.ArrayLike, *, name: str = "operator") -> DenseOperator:
    arr = np.asarray(a, dtype=np.float64)

    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must be a nonempty 2-d array, got shape {arr.shape}.")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries.")

    return arr


def as_state(x: npt.ArrayLike, *, name: str = "state") -> State:
    arr = np.asarray(x, dtype=np.float64)

    if arr.ndim != 1 or arr.shape[0] < 1:
        raise DimensionError(f"{name} must be a nonempty 1-d array, got shape {arr.shape}.")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries.")

    return arr


def _require_square(a: DenseOperator, name: str):
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}.")


def identity(dim: int) -> DenseOperator:
    if dim < 1:
        raise DimensionError(f"dimension must be positive, got {dim}.")
    return np.eye(dim)


def expm(a: npt.ArrayLike, t: Time = 1.0) -> DenseOperator:
    """``e^{tA}`` by scaling and squaring with a degree-13 Padé kernel."""
    a = as_operator(a, name="generator")
    _require_square(a, "generator")

    if not math.isfinite(t) or t < 0:
        raise InputError(f"time must be finite and nonnegative, got {t!r}.")

    if t == 0:
        return np.eye(a.shape[0])

    return scipy.linalg.expm(t * a)


def operator_norm(a: npt.ArrayLike, *, norm: NormKind = "spectral") -> float:
    a = as_operator(a)

    if norm == "l1":
        return float(np.abs(a).sum(axis=0).max())
    if norm != "spectral":
        raise InputError(f"unknown norm {norm!r}, expected 'spectral' or 'l1'.")

    try:
        return float(np.linalg.norm(a, 2))
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"singular value iteration did not converge: {e}", last_iterate=a)


def relative_deviation(
    actual: npt.ArrayLike, expected: npt.ArrayLike, *, norm: NormKind = "spectral"
) -> float:
    """``‖actual − expected‖ / max(1, ‖expected‖)``."""
    actual = np.asarray(actual, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)

    if actual.shape != expected.shape:
        raise DimensionError(f"cannot compare shapes {actual.shape} and {expected.shape}.")

    if actual.ndim == 1:
        actual = actual[:, None]
        expected = expected[:, None]

    return operator_norm(actual - expected, norm=norm) / max(
        1.0, operator_norm(expected, norm=norm)
    )


def spectral_bound(a: npt.ArrayLike) -> float:
    a = as_operator(a)
    _require_square(a, "operator")
    return float(np.linalg.eigvals(a).real.max())


class EvolutionFamily:
    """A map ``t ↦ F(t)`` into square operators of side ``dim``.

    Construction does not check the semigroup law; see :func:`check_semigroup_law`.
    """

    def __init__(
        self,
        dim: int,
        evaluate: t.Callable[[Time], npt.ArrayLike],
        *,
        generator: t.Optional[DenseOperator] = None,
        label: str = "",
    ):
        if dim < 1:
            raise DimensionError(f"dimension must be positive, got {dim}.")

        self.dim: int = dim
        self.generator: t.Optional[DenseOperator] = generator
        self.label: str = label
        self._evaluate = functools.lru_cache(maxsize=_FAMILY_CACHE_SIZE)(
            functools.partial(self._checked, evaluate)
        )

    def __repr__(self):
        return f"<EvolutionFamily {self.label or 'anonymous'} dim={self.dim}>"

    def _checked(self, evaluate: t.Callable[[Time], npt.ArrayLike], time: Time) -> DenseOperator:
        value = as_operator(evaluate(time), name=f"{self.label or 'family'}({time})")

        if value.shape != (self.dim, self.dim):
            raise DimensionError(
                f"family {self.label!r} returned shape {value.shape}, expected side {self.dim}."
            )

        value = value.copy()
        value.setflags(write=False)
        return value

    def __call__(self, time: Time) -> DenseOperator:
        if not math.isfinite(time) or time < 0:
            raise InputError(f"time must be finite and nonnegative, got {time!r}.")
        return self._evaluate(float(time))

    @classmethod
    def from_generator(cls, a: npt.ArrayLike, *, label: str = ""):
        a = as_operator(a, name="generator")
        _require_square(a, "generator")
        a.setflags(write=False)

        return cls(a.shape[0], functools.partial(_expm_at, a), generator=a, label=label)


def _expm_at(a: DenseOperator, time: Time) -> DenseOperator:
    return expm(a, time)


def semigroup_family_from_generator(a: npt.ArrayLike, *, label: str = "") -> EvolutionFamily:
    return EvolutionFamily.from_generator(a, label=label)


def identity_family(dim: int) -> EvolutionFamily:
    return EvolutionFamily.from_generator(np.zeros((dim, dim)), label="identity")


def nilpotent_family(c: npt.ArrayLike, *, label: str = "nilpotent") -> EvolutionFamily:
    """``t ↦ I + tC`` for a generator with ``C² = 0``."""
    c = as_operator(c, name="nilpotent generator")
    _require_square(c, "nilpotent generator")

    square = c @ c
    scale = max(1.0, float(np.abs(c).max()) ** 2)
    deviation = float(np.abs(square).max()) / scale
    if deviation > TOL_IDENTITY:
        raise StructuralError("generator is not nilpotent of index 2", deviation=deviation)

    c = c.copy()
    c.setflags(write=False)
    eye = np.eye(c.shape[0])

    return EvolutionFamily(c.shape[0], lambda time: eye + time * c, generator=c, label=label)


@dataclasses.dataclass(frozen=True)
class GrowthBound:
    """Certificate ``‖·‖ ≤ M e^{ωt}``."""

    M: float
    omega: float

    def __post_init__(self):
        if not (math.isfinite(self.M) and math.isfinite(self.omega)):
            raise InputError(f"growth bound must be finite, got M={self.M}, omega={self.omega}.")
        if self.M < 1:
            raise InputError(f"growth bound needs M >= 1, got {self.M}.")

    def value(self, time: Time) -> float:
        return self.M * math.exp(self.omega * time)

    def dominates(self, norm: float, time: Time, *, slack: float = TOL_SEMIGROUP) -> bool:
        return norm <= self.value(time) * (1 + slack)

    def to_json(self) -> dict[str, float]:
        return {"M": self.M, "omega": self.omega}


def check_semigroup_law(
    family: EvolutionFamily,
    samples: t.Iterable[tuple[Time, Time]],
    *,
    tol: float = TOL_SEMIGROUP,
    norm: NormKind = "spectral",
) -> IdentityReport:
    samples = tuple((float(s), float(u)) for s, u in samples)
    deviations = []

    for s, u in samples:
        combined = family(s + u)
        deviation = relative_deviation(family(s) @ family(u), combined, norm=norm)
        deviations.append(deviation)

        _log.debug("Semigroup law at (%g, %g): deviation %.3e.", s, u, deviation)

    return IdentityReport("semigroup-law", samples, tuple(deviations), tol)


def check_nilpotent_exponential(
    c: npt.ArrayLike,
    times: t.Iterable[Time],
    *,
    tol: float = TOL_IDENTITY,
    norm: NormKind = "spectral",
) -> IdentityReport:
    """``e^{tC} = I + tC`` for ``C² = 0``."""
    family = nilpotent_family(c)
    samples = tuple((float(s),) for s in times)

    deviations = tuple(
        relative_deviation(expm(family.generator, s), family(s), norm=norm) for (s,) in samples
    )
    return IdentityReport("nilpotent-exponential", samples, deviations, tol)
