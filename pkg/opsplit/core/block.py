# SPDX-License-Identifier: MIT
"""2×2 block operators and upper triangular matrix semigroups."""

from __future__ import annotations

import dataclasses
import functools
import logging
import typing as t

import numpy as np
import numpy.typing as npt
import scipy.integrate
import scipy.linalg

from .errors import DimensionError, InputError, SpectrumError
from .linop import (
    TOL_IDENTITY,
    TOL_SEMIGROUP,
    DenseOperator,
    EvolutionFamily,
    NormKind,
    Time,
    as_operator,
    expm,
    relative_deviation,
)
from .reports import IdentityReport

__all__ = (
    "TOL_TRIANGULAR",
    "TOL_CONDITION_I",
    "BlockOperator",
    "TriangularFamily",
    "triangular_exp",
    "check_condition_i",
    "sequential_block_power",
    "weighted_block_power",
    "check_block_powers",
    "check_cocycle",
    "offdiagonal_quadrature",
    "check_factorization",
)

_log = logging.getLogger(__name__)

TOL_TRIANGULAR = TOL_IDENTITY
TOL_CONDITION_I = 1e-14


@dataclasses.dataclass(frozen=True)
class BlockOperator:
    """``[[a11, a12], [a21, a22]]`` acting on ``E × F``."""

    a11: DenseOperator
    a12: DenseOperator
    a21: DenseOperator
    a22: DenseOperator

    def __post_init__(self):
        for name in ("a11", "a12", "a21", "a22"):
            object.__setattr__(self, name, as_operator(getattr(self, name), name=name))

        dim_e, dim_f = self.a11.shape[0], self.a22.shape[0]
        expected = {
            "a11": (dim_e, dim_e),
            "a12": (dim_e, dim_f),
            "a21": (dim_f, dim_e),
            "a22": (dim_f, dim_f),
        }

        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise DimensionError(
                    f"block {name} has shape {getattr(self, name).shape}, expected {shape}."
                )

    @property
    def dim_e(self) -> int:
        return self.a11.shape[0]

    @property
    def dim_f(self) -> int:
        return self.a22.shape[0]

    @property
    def lower_left_max(self) -> float:
        return float(np.abs(self.a21).max())

    def to_dense(self) -> DenseOperator:
        return np.block([[self.a11, self.a12], [self.a21, self.a22]])

    @classmethod
    def from_dense(cls, m: npt.ArrayLike, dim_e: int):
        m = as_operator(m)

        if m.shape[0] != m.shape[1] or not 0 < dim_e < m.shape[0]:
            raise DimensionError(f"cannot split a {m.shape} matrix at {dim_e}.")

        return cls(m[:dim_e, :dim_e], m[:dim_e, dim_e:], m[dim_e:, :dim_e], m[dim_e:, dim_e:])

    @classmethod
    def upper(cls, a11: npt.ArrayLike, a12: npt.ArrayLike, a22: npt.ArrayLike):
        a12 = as_operator(a12, name="a12")
        return cls(a11, a12, np.zeros(a12.shape[::-1]), a22)


@dataclasses.dataclass(frozen=True)
class TriangularFamily:
    """The triple ``(T, R, S)`` of an upper triangular matrix semigroup."""

    T: EvolutionFamily
    S: EvolutionFamily
    R: t.Callable[[Time], npt.ArrayLike]
    label: str = ""

    @property
    def dim_e(self) -> int:
        return self.T.dim

    @property
    def dim_f(self) -> int:
        return self.S.dim

    def offdiagonal(self, time: Time) -> DenseOperator:
        value = as_operator(self.R(time), name="R")

        if value.shape != (self.dim_e, self.dim_f):
            raise DimensionError(
                f"R({time}) has shape {value.shape}, expected {(self.dim_e, self.dim_f)}."
            )

        return value

    def __call__(self, time: Time) -> BlockOperator:
        return BlockOperator.upper(self.T(time), self.offdiagonal(time), self.S(time))

    def as_family(self) -> EvolutionFamily:
        return EvolutionFamily(
            self.dim_e + self.dim_f,
            lambda time: self(time).to_dense(),
            label=self.label or "triangular",
        )


def _check_compatible(f1: TriangularFamily, f2: TriangularFamily):
    if (f1.dim_e, f1.dim_f) != (f2.dim_e, f2.dim_f):
        raise DimensionError(
            f"triangular families act on different spaces: "
            f"{(f1.dim_e, f1.dim_f)} vs {(f2.dim_e, f2.dim_f)}."
        )


def triangular_exp(
    a: npt.ArrayLike, p: npt.ArrayLike, b: npt.ArrayLike, *, label: str = ""
) -> TriangularFamily:
    """Triangular family of the generator ``[[A, P], [0, B]]``."""
    a = as_operator(a, name="A")
    p = as_operator(p, name="P")
    b = as_operator(b, name="B")
    generator = BlockOperator.upper(a, p, b)
    dim_e = generator.dim_e
    full = generator.to_dense()

    @functools.lru_cache(maxsize=256)
    def value(time: Time) -> BlockOperator:
        raw = expm(full, time)
        block = BlockOperator.from_dense(raw, dim_e)
        scale = max(1.0, float(np.abs(raw).max()))

        # the generator has a zero a21 by construction, anything there is rounding from
        # the pivoted Pade solve and the squarings
        if block.lower_left_max > TOL_TRIANGULAR * scale:
            _log.debug(
                "Dropped a lower-left leak of %.3e (relative) from the exponential at t=%g.",
                block.lower_left_max / scale,
                time,
            )

        return BlockOperator.upper(block.a11, block.a12, block.a22)

    return TriangularFamily(
        T=EvolutionFamily(dim_e, lambda time: value(time).a11, generator=a, label="T"),
        S=EvolutionFamily(generator.dim_f, lambda time: value(time).a22, generator=b, label="S"),
        R=lambda time: value(float(time)).a12,
        label=label,
    )


def check_condition_i(block: BlockOperator, *, tol: float = TOL_CONDITION_I) -> bool:
    """Whether the second component of ``𝒜(x, 0)`` vanishes, i.e. ``a21 = 0``."""
    return block.lower_left_max <= tol


def _validate_power_args(h: Time, k: int):
    if h < 0:
        raise InputError(f"step must be nonnegative, got {h}.")
    if k < 1:
        raise InputError(f"power must be at least 1, got {k}.")


def _powers(x: DenseOperator, k: int) -> list[DenseOperator]:
    powers = [np.eye(x.shape[0])]
    for _ in range(k):
        powers.append(powers[-1] @ x)
    return powers


def _assemble_power(
    diag_e: DenseOperator, coupling: DenseOperator, diag_f: DenseOperator, k: int
) -> BlockOperator:
    left = _powers(diag_e, k)
    right = _powers(diag_f, k)

    offdiag = np.zeros_like(coupling)
    for j in range(k):
        offdiag += left[j] @ coupling @ right[k - 1 - j]

    return BlockOperator.upper(left[k], offdiag, right[k])


def sequential_block_power(
    f1: TriangularFamily, f2: TriangularFamily, h: Time, k: int
) -> BlockOperator:
    """``(𝒯₂(h)𝒯₁(h))^k`` from the closed form of its blocks."""
    _check_compatible(f1, f2)
    _validate_power_args(h, k)

    t1, r1, s1 = f1.T(h), f1.offdiagonal(h), f1.S(h)
    t2, r2, s2 = f2.T(h), f2.offdiagonal(h), f2.S(h)
    coupling = t2 @ r1 + r2 @ s1

    return _assemble_power(t2 @ t1, coupling, s2 @ s1, k)


def weighted_block_power(
    f1: TriangularFamily, f2: TriangularFamily, h: Time, k: int
) -> BlockOperator:
    """``(𝒯₁(h)𝒯₂(h) + 𝒯₂(h)𝒯₁(h))^k``, without the ``2^{-k}`` factor."""
    _check_compatible(f1, f2)
    _validate_power_args(h, k)

    t1, r1, s1 = f1.T(h), f1.offdiagonal(h), f1.S(h)
    t2, r2, s2 = f2.T(h), f2.offdiagonal(h), f2.S(h)
    coupling = t1 @ r2 + r1 @ s2 + t2 @ r1 + r2 @ s1

    return _assemble_power(t1 @ t2 + t2 @ t1, coupling, s1 @ s2 + s2 @ s1, k)


def check_block_powers(
    f1: TriangularFamily,
    f2: TriangularFamily,
    samples: t.Iterable[tuple[Time, int]],
    *,
    tol: float = 1e-10,
    norm: NormKind = "spectral",
) -> IdentityReport:
    """Closed-form powers against repeated multiplication, both product forms per sample."""
    samples = tuple((float(h), int(k)) for h, k in samples)
    full1, full2 = f1.as_family(), f2.as_family()
    deviations = []

    for h, k in samples:
        sequential = np.linalg.matrix_power(full2(h) @ full1(h), k)
        weighted = np.linalg.matrix_power(full1(h) @ full2(h) + full2(h) @ full1(h), k)

        closed_sequential = sequential_block_power(f1, f2, h, k).to_dense()
        closed_weighted = weighted_block_power(f1, f2, h, k).to_dense()

        deviation = max(
            relative_deviation(closed_sequential, sequential, norm=norm),
            relative_deviation(closed_weighted, weighted, norm=norm),
        )
        deviations.append(deviation)

        _log.debug("Block powers at (h=%g, k=%d): deviation %.3e.", h, k, deviation)

    return IdentityReport("block-powers", samples, tuple(deviations), tol)


def check_cocycle(
    family: TriangularFamily,
    samples: t.Iterable[tuple[Time, Time]],
    *,
    tol: float = TOL_SEMIGROUP,
    norm: NormKind = "spectral",
) -> IdentityReport:
    """``R(t+s) = T(t)R(s) + R(t)S(s)`` on each sample."""
    samples = tuple((float(s), float(u)) for s, u in samples)
    deviations = []

    for s, u in samples:
        expected = family.offdiagonal(s + u)
        composed = family.T(s) @ family.offdiagonal(u) + family.offdiagonal(s) @ family.S(u)
        deviation = relative_deviation(composed, expected, norm=norm)
        deviations.append(deviation)

        _log.debug("Cocycle at (%g, %g): deviation %.3e.", s, u, deviation)

    return IdentityReport("cocycle", samples, tuple(deviations), tol)


def offdiagonal_quadrature(
    a: npt.ArrayLike, p: npt.ArrayLike, b: npt.ArrayLike, time: Time, *, panels: int = 1000
) -> DenseOperator:
    """Composite trapezoid value of ``∫₀ᵗ e^{(t−s)A} P e^{sB} ds``."""
    a = as_operator(a, name="A")
    p = as_operator(p, name="P")
    b = as_operator(b, name="B")

    if panels < 1:
        raise InputError(f"need at least one panel, got {panels}.")

    nodes = np.linspace(0.0, time, panels + 1)
    values = np.stack([expm(a, time - s) @ p @ expm(b, s) for s in nodes])

    return scipy.integrate.trapezoid(values, nodes, axis=0)


def check_factorization(
    a: npt.ArrayLike,
    p: npt.ArrayLike,
    b: npt.ArrayLike,
    lam: float,
    *,
    d_lambda: t.Optional[npt.ArrayLike] = None,
    tol: float = 1e-10,
) -> IdentityReport:
    """``λ − 𝒜 = (λ − 𝒟)[[I, −D_λ], [0, I]]``.

    Here ``𝒜 = [[A, P], [0, B]]`` and ``𝒟 = diag(A, B)``.
    """
    generator = BlockOperator.upper(a, p, b)
    dim_e, dim_f = generator.dim_e, generator.dim_f

    if d_lambda is None:
        try:
            d_lambda = scipy.linalg.solve(lam * np.eye(dim_e) - generator.a11, generator.a12)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
            raise SpectrumError(lam, detail=str(e))

    d_lambda = as_operator(d_lambda, name="D_lambda")
    eye = np.eye(dim_e + dim_f)
    diagonal = BlockOperator(
        generator.a11, np.zeros((dim_e, dim_f)), np.zeros((dim_f, dim_e)), generator.a22
    ).to_dense()
    shear = BlockOperator.upper(np.eye(dim_e), -d_lambda, np.eye(dim_f)).to_dense()

    lhs = lam * eye - generator.to_dense()
    rhs = (lam * eye - diagonal) @ shear
    deviation = relative_deviation(rhs, lhs)

    return IdentityReport("factorization", ((float(lam),),), (deviation,), tol)
