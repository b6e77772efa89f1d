# SPDX-License-Identifier: MIT
"""Boundary feedback systems in (interior, boundary) coordinates.

The maximal operator acts as ``A_m(f, x) = Af + Γx`` and the trace is
``L(f, x) = x``, so ``ker L`` is the interior and the Dirichlet operator is
``D_λ = (λ − A)⁻¹Γ``. The coupled generator splits as

    𝒜_C = [[A, Γ], [0, 0]] + [[0, 0], [0, B]] + [[0, 0], [C, 0]]
"""

from __future__ import annotations

import dataclasses
import logging
import math
import typing as t

import numpy as np
import scipy.linalg
import scipy.sparse

from ..core.block import BlockOperator, check_factorization
from ..core.errors import DimensionError, InputError, SpectrumError
from ..core.linop import (
    DenseOperator,
    EvolutionFamily,
    NormKind,
    Time,
    as_operator,
    expm,
    nilpotent_family,
    operator_norm,
    relative_deviation,
    spectral_bound,
)
from ..core.reports import IdentityReport
from ..internal.async_utils import run_parallel
from ..splitting.schemes import ConvergenceReport, Scheme, convergence_study, step_family
from ..splitting.stability import FAVARD_GRID, favard_quotient

__all__ = (
    "TOL_DIRICHLET",
    "DS_DECAY_THRESHOLD",
    "Nesting",
    "BoundarySystem",
    "DirichletOperator",
    "dirichlet_solve",
    "check_dirichlet_residual",
    "DecayReport",
    "ds_decay_check",
    "feedback_generator",
    "t1_closed_form",
    "check_t1_closed_form",
    "offdiagonal_r1",
    "favard_surrogate",
    "check_dirichlet_factorization",
    "feedback_split_study",
)

_log = logging.getLogger(__name__)

Nesting = t.Literal["coupling-outer", "coupling-inner"]

TOL_DIRICHLET = 1e-10
DS_DECAY_THRESHOLD = 0.9
DS_DECAY_MIN_WINDOW = 5
DS_DECAY_EXTENSION = 10 ** (1 / 4)


@dataclasses.dataclass(frozen=True)
class BoundarySystem:
    A: DenseOperator
    Gamma: DenseOperator
    B: DenseOperator
    C: DenseOperator

    def __post_init__(self):
        for name in ("A", "Gamma", "B", "C"):
            object.__setattr__(self, name, as_operator(getattr(self, name), name=name))

        dim_e, dim_de = self.A.shape[0], self.B.shape[0]
        expected = {
            "A": (dim_e, dim_e),
            "Gamma": (dim_e, dim_de),
            "B": (dim_de, dim_de),
            "C": (dim_de, dim_e),
        }

        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise DimensionError(
                    f"{name} has shape {getattr(self, name).shape}, expected {shape}."
                )

    @property
    def dim_e(self) -> int:
        return self.A.shape[0]

    @property
    def dim_de(self) -> int:
        return self.B.shape[0]

    @property
    def dim(self) -> int:
        return self.dim_e + self.dim_de

    @classmethod
    def laplace1d(cls, n: int = 32):
        """Dirichlet Laplacian on ``n`` interior nodes, fed by the right boundary value.

        The boundary value decays with ``B = [−1]`` and is driven back by the
        interior mean.
        """
        if n < 2:
            raise InputError(f"the Laplacian fixture needs at least 2 nodes, got {n}.")

        h = 1 / (n + 1)
        a = scipy.sparse.diags([-2.0 * np.ones(n), np.ones(n - 1), np.ones(n - 1)], [0, -1, 1])
        gamma = np.zeros((n, 1))
        gamma[-1, 0] = 1 / h**2

        return cls(a.toarray() / h**2, gamma, np.array([[-1.0]]), np.full((1, n), 1 / n))

    @classmethod
    def scalar(cls, a: float = -1.0, gamma: float = 1.0, b: float = -1.0, c: float = 1.0):
        return cls([[a]], [[gamma]], [[b]], [[c]])

    def without_feedback(self) -> BoundarySystem:
        return dataclasses.replace(self, C=np.zeros_like(self.C))


@dataclasses.dataclass(frozen=True)
class DirichletOperator:
    lam: float
    D: DenseOperator
    residual: float


def dirichlet_solve(system: BoundarySystem, lam: float) -> DirichletOperator:
    """``D_λ = (λ − A)⁻¹Γ``, so that ``AD_λ + Γ = λD_λ``."""
    shifted = lam * np.eye(system.dim_e) - system.A

    try:
        d = scipy.linalg.solve(shifted, system.Gamma)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise SpectrumError(lam, condition=float(np.linalg.cond(shifted)), detail=str(e))

    residual = relative_deviation(shifted @ d, system.Gamma)
    if not residual <= TOL_DIRICHLET:
        raise SpectrumError(
            lam,
            condition=float(np.linalg.cond(shifted)),
            detail=f"Dirichlet residual {residual:.3e} exceeds {TOL_DIRICHLET:g}",
        )

    return DirichletOperator(lam=float(lam), D=d, residual=residual)


@dataclasses.dataclass(frozen=True)
class DecayReport:
    lambdas: tuple[float, ...]
    norms: tuple[float, ...]
    window_start: float
    c: t.Optional[float]
    alpha: t.Optional[float]
    residual: t.Optional[float]
    extended: bool

    @property
    def degenerate(self) -> bool:
        return self.alpha is None

    @property
    def passed(self) -> bool:
        return self.alpha is not None and self.alpha >= DS_DECAY_THRESHOLD

    def to_json(self) -> dict[str, t.Any]:
        return {
            "lambdas": list(self.lambdas),
            "norms": list(self.norms),
            "window_start": self.window_start,
            "c": self.c,
            "alpha": self.alpha,
            "residual": self.residual,
            "extended": self.extended,
            "degenerate": self.degenerate,
            "passed": self.passed,
        }


def ds_decay_check(
    system: BoundarySystem,
    lambda_grid: t.Sequence[float],
    *,
    norm: NormKind = "spectral",
    threads: t.Optional[int] = None,
) -> DecayReport:
    """Fit ``‖D_λ‖ ≈ cλ^{−α}`` on the part of the grid with ``λ ≥ 10‖A‖``."""
    lambdas = [float(lam) for lam in lambda_grid]

    if not lambdas:
        raise InputError("the lambda grid must be nonempty.")
    if any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise InputError("the lambda grid must be strictly increasing.")

    bound = spectral_bound(system.A)
    if lambdas[0] <= bound:
        raise InputError(
            f"lambda {lambdas[0]!r} does not exceed the spectral bound {bound:.6g} of A."
        )

    window_start = 10 * operator_norm(system.A, norm=norm)
    extended = False

    def in_window(lam: float) -> bool:
        return lam >= window_start and lam > 0

    if lambdas[-1] <= 0 and sum(map(in_window, lambdas)) < DS_DECAY_MIN_WINDOW:
        raise InputError("the lambda grid must reach positive values.")

    while sum(map(in_window, lambdas)) < DS_DECAY_MIN_WINDOW:
        lambdas.append(lambdas[-1] * DS_DECAY_EXTENSION)
        extended = True

    if extended:
        _log.warning(
            "Extended the lambda grid to %.4g so that %d points reach 10*||A|| = %.4g.",
            lambdas[-1],
            DS_DECAY_MIN_WINDOW,
            window_start,
        )

    def norm_at(lam: float) -> float:
        return operator_norm(dirichlet_solve(system, lam).D, norm=norm)

    norms = run_parallel(norm_at, lambdas, threads=threads)
    window = [(lam, v) for lam, v in zip(lambdas, norms) if in_window(lam)]

    if any(v <= 0 for _, v in window):
        _log.warning("Dirichlet operators vanish on the window, the decay fit is degenerate.")
        return DecayReport(tuple(lambdas), tuple(norms), window_start, None, None, None, extended)

    x = np.log([lam for lam, _ in window])
    y = np.log([v for _, v in window])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.abs(y - (slope * x + intercept)).max())

    _log.info("Dirichlet decay exponent %.4f over %d points.", -slope, len(window))
    return DecayReport(
        tuple(lambdas),
        tuple(norms),
        window_start,
        float(math.exp(intercept)),
        float(-slope),
        residual,
        extended,
    )


def feedback_generator(system: BoundarySystem) -> DenseOperator:
    """``𝒜_C = [[A, Γ], [C, B]]``."""
    return BlockOperator(system.A, system.Gamma, system.C, system.B).to_dense()


def _dirichlet_zero(system: BoundarySystem) -> DenseOperator:
    return dirichlet_solve(system, 0.0).D


def offdiagonal_r1(system: BoundarySystem, time: Time) -> DenseOperator:
    """``R₁(t) = (I − T(t))D₀`` with ``D₀ = −A⁻¹Γ``."""
    return (np.eye(system.dim_e) - expm(system.A, time)) @ _dirichlet_zero(system)


def _assemble_t1(system: BoundarySystem, d0: DenseOperator, time: Time) -> DenseOperator:
    semigroup = expm(system.A, time)
    offdiag = (np.eye(system.dim_e) - semigroup) @ d0
    return BlockOperator.upper(semigroup, offdiag, np.eye(system.dim_de)).to_dense()


def t1_closed_form(system: BoundarySystem, time: Time) -> DenseOperator:
    """``𝒯₁(t) = [[T(t), (I − T(t))D₀], [0, I]]``, generated by ``[[A, Γ], [0, 0]]``."""
    return _assemble_t1(system, _dirichlet_zero(system), time)


def favard_surrogate(
    system: BoundarySystem,
    t_grid: t.Sequence[Time] = FAVARD_GRID,
    *,
    norm: NormKind = "spectral",
) -> float:
    return favard_quotient(lambda s: offdiagonal_r1(system, s), t_grid, norm=norm)


def check_dirichlet_factorization(
    system: BoundarySystem, lam: float, *, tol: float = TOL_DIRICHLET
) -> IdentityReport:
    """The factorization of ``λ − 𝒜₁`` for ``𝒜₁ = [[A, Γ], [0, 0]]``."""
    if lam == 0:
        raise InputError("lambda must avoid the spectrum of the zero boundary block.")

    d = dirichlet_solve(system, lam).D
    return check_factorization(
        system.A, system.Gamma, np.zeros((system.dim_de, system.dim_de)), lam, d_lambda=d, tol=tol
    )


def _interior_family(system: BoundarySystem) -> EvolutionFamily:
    d0 = _dirichlet_zero(system)
    return EvolutionFamily(system.dim, lambda time: _assemble_t1(system, d0, time), label="T1")


def _boundary_family(system: BoundarySystem) -> EvolutionFamily:
    generator = np.zeros((system.dim, system.dim))
    generator[system.dim_e :, system.dim_e :] = system.B
    return EvolutionFamily.from_generator(generator, label="T2")


def _coupling_family(system: BoundarySystem) -> EvolutionFamily:
    generator = np.zeros((system.dim, system.dim))
    generator[system.dim_e :, : system.dim_e] = system.C
    return nilpotent_family(generator, label="S")


def feedback_split_study(
    system: BoundarySystem,
    scheme: Scheme,
    time: Time,
    ns: t.Sequence[int],
    *,
    nesting: Nesting = "coupling-outer",
    norm: NormKind = "spectral",
    threads: t.Optional[int] = None,
) -> ConvergenceReport:
    """Three-way splitting of ``𝒜_C`` as nested two-way splits against ``expm(𝒜_C t)``."""
    interior = _interior_family(system)
    boundary = _boundary_family(system)
    coupling = _coupling_family(system)

    if nesting == "coupling-outer":
        f1, f2 = step_family(scheme, interior, boundary), coupling
    elif nesting == "coupling-inner":
        f1, f2 = interior, step_family(scheme, boundary, coupling)
    else:
        raise InputError(f"unknown nesting {nesting!r}.")

    _log.info("Feedback splitting, %s, dims %d+%d.", nesting, system.dim_e, system.dim_de)

    reference = expm(feedback_generator(system), time)
    return convergence_study(scheme, f1, f2, reference, time, ns, norm=norm, threads=threads)


def check_t1_closed_form(
    system: BoundarySystem,
    times: t.Iterable[Time],
    *,
    tol: float = TOL_DIRICHLET,
    norm: NormKind = "spectral",
) -> IdentityReport:
    """:func:`t1_closed_form` against ``expm(t[[A, Γ], [0, 0]])``."""
    generator = BlockOperator.upper(
        system.A, system.Gamma, np.zeros((system.dim_de, system.dim_de))
    ).to_dense()
    d0 = _dirichlet_zero(system)
    samples = tuple((float(s),) for s in times)

    deviations = tuple(
        relative_deviation(_assemble_t1(system, d0, s), expm(generator, s), norm=norm)
        for (s,) in samples
    )
    return IdentityReport("t1-closed-form", samples, deviations, tol)


def check_dirichlet_residual(
    system: BoundarySystem, lambdas: t.Iterable[float], *, tol: float = TOL_DIRICHLET
) -> IdentityReport:
    solved = [dirichlet_solve(system, lam) for lam in lambdas]
    samples = tuple((d.lam,) for d in solved)
    return IdentityReport("dirichlet-residual", samples, tuple(d.residual for d in solved), tol)
