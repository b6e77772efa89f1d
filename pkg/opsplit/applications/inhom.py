# SPDX-License-Identifier: MIT
"""Inhomogeneous problems ``u′ = (A₁ + A₂)u + f₁ + f₂`` split via the augmented system.

The inhomogeneities ride along as extra components moved by the left shift, and
each sub-generator acts on ``(u, f₁, f₂)`` as

    𝒯₁(t) = [[T₁(t), Q₁(t), 0], [0, L(t), 0], [0, 0, I]]
    𝒯₂(t) = [[T₂(t), 0, Q₂(t)], [0, I, 0], [0, 0, L(t)]]

with ``Q_i(t)f = ∫₀ᵗ T_i(t−s)f(s) ds``.
"""

from __future__ import annotations

import dataclasses
import functools
import itertools
import logging
import math
import typing as t

import numpy as np
import numpy.typing as npt

from ..core.errors import DimensionError, InputError
from ..core.linop import (
    DenseOperator,
    EvolutionFamily,
    NormKind,
    State,
    Time,
    as_operator,
    as_state,
    operator_norm,
    relative_deviation,
)
from ..core.reports import IdentityReport
from ..internal.async_utils import run_parallel
from ..splitting.schemes import ConvergenceReport, Scheme, fit_order, split_evolve
from ..splitting.stability import StabilitySampleSet
from .errors import DiscretizationError, DomainError
from .grid import ON_GRID_TOL, GridFunction, GridNorm, grid_offset

__all__ = (
    "TOL_LP_SUMS",
    "InhomProblem",
    "AugmentedState",
    "duhamel",
    "augmented_apply",
    "split_solve_inhom",
    "reference_inhom",
    "inhom_convergence_study",
    "AugmentedFamily",
    "augmented_norm",
    "verify_lp_sum_identities",
    "sample_augmented_norms",
)

_log = logging.getLogger(__name__)

TOL_LP_SUMS = 1e-10


@dataclasses.dataclass(frozen=True)
class InhomProblem:
    a1: DenseOperator
    a2: DenseOperator
    f1: GridFunction
    f2: GridFunction
    u0: State

    def __post_init__(self):
        object.__setattr__(self, "a1", as_operator(self.a1, name="A1"))
        object.__setattr__(self, "a2", as_operator(self.a2, name="A2"))
        object.__setattr__(self, "u0", as_state(self.u0, name="u0"))

        dim = self.u0.shape[0]
        for name in ("a1", "a2"):
            if getattr(self, name).shape != (dim, dim):
                raise DimensionError(
                    f"{name} has shape {getattr(self, name).shape}, expected side {dim}."
                )

        for name in ("f1", "f2"):
            if getattr(self, name).dim != dim:
                raise DimensionError(
                    f"{name} has values of size {getattr(self, name).dim}, expected {dim}."
                )

        if not self.f1.compatible(self.f2):
            raise DiscretizationError("f1 and f2 must share the grid spacing and horizon.")

    @property
    def dim(self) -> int:
        return self.u0.shape[0]

    @property
    def tau_max(self) -> float:
        return self.f1.tau_max

    @functools.cached_property
    def families(self) -> tuple[EvolutionFamily, EvolutionFamily]:
        return (
            EvolutionFamily.from_generator(self.a1, label="T1"),
            EvolutionFamily.from_generator(self.a2, label="T2"),
        )

    def homogeneous(self) -> InhomProblem:
        zero = GridFunction.zeros(self.f1.count, self.f1.delta_s, self.dim)
        return dataclasses.replace(self, f1=zero, f2=zero)


class AugmentedState(t.NamedTuple):
    u: State
    f1: GridFunction
    f2: GridFunction


def _check_horizon(time: Time, f: GridFunction):
    if not math.isfinite(time) or time < 0:
        raise InputError(f"time must be finite and nonnegative, got {time!r}.")
    if time > f.tau_max + ON_GRID_TOL * f.delta_s:
        raise DomainError(time, f.tau_max, what="the inhomogeneity grid")


def duhamel(family: EvolutionFamily, f: GridFunction, time: Time) -> State:
    """Composite trapezoid value of ``∫₀ᵗ T(t−s)f(s) ds`` on the nodes of ``f``.

    Panels are propagated with ``T(Δs)`` by the semigroup law; an off-grid ``t``
    adds one partial panel ending at the interpolated ``f(t)``.
    """
    if family.dim != f.dim:
        raise DimensionError(f"family of side {family.dim} cannot act on values of size {f.dim}.")
    _check_horizon(time, f)

    offset = grid_offset(time, f.delta_s)
    if offset is not None:
        m, rest = offset, 0.0
    else:
        m = int(math.floor(time / f.delta_s))
        rest = time - m * f.delta_s

    acc = np.zeros(f.dim)

    if m > 0:
        step = family(f.delta_s)
        half = f.delta_s / 2

        acc = half * f.values[0]
        for j in range(1, m):
            acc = step @ acc + f.delta_s * f.values[j]
        acc = step @ acc + half * f.values[m]

    if rest > 0:
        tail = family(rest)
        acc = tail @ acc + rest / 2 * (tail @ f.values[m] + f.at(time))

    return acc


def augmented_apply(
    t1: EvolutionFamily,
    t2: EvolutionFamily,
    f1: GridFunction,
    f2: GridFunction,
    u0: State,
    time: Time,
    *,
    active: t.Literal[1, 2],
) -> AugmentedState:
    """``𝒯_i(t)(u0, f1, f2)`` for ``i = active``."""
    if active not in (1, 2):
        raise InputError(f"active sub-generator must be 1 or 2, got {active!r}.")
    if not f1.compatible(f2):
        raise DiscretizationError("f1 and f2 must share the grid spacing and horizon.")

    u0 = as_state(u0, name="u0")
    family, f = (t1, f1) if active == 1 else (t2, f2)

    u = family(time) @ u0 + duhamel(family, f, time)
    shifted = f.shift(time)

    if active == 1:
        return AugmentedState(u, shifted, f2)
    return AugmentedState(u, f1, shifted)


Plan = list[tuple[t.Literal[1, 2], Time]]


def _forward(h: Time) -> Plan:
    return [(1, h), (2, h)]


def _backward(h: Time) -> Plan:
    return [(2, h), (1, h)]


def _symmetric(h: Time) -> Plan:
    return [(1, h / 2), (2, h), (1, h / 2)]


def split_solve_inhom(problem: InhomProblem, scheme: Scheme, time: Time, n: int) -> State:
    """``π₁`` of ``n`` split steps of size ``t/n`` applied to ``(u0, f1, f2)``."""
    if n < 1:
        raise InputError(f"step count must be at least 1, got {n}.")
    _check_horizon(time, problem.f1)

    t1, t2 = problem.families
    h = time / n
    state = AugmentedState(problem.u0, problem.f1, problem.f2)

    def run(start: AugmentedState, plan: Plan) -> AugmentedState:
        for active, span in plan:
            start = augmented_apply(t1, t2, start.f1, start.f2, start.u, span, active=active)
        return start

    for _ in range(n):
        if scheme is Scheme.WEIGHTED:
            forward = run(state, _forward(h))
            backward = run(state, _backward(h))
            # both orderings shift each inhomogeneity by h once
            state = forward._replace(u=(forward.u + backward.u) / 2)
        else:
            state = run(state, _symmetric(h) if scheme is Scheme.STRANG else _forward(h))

    return state.u


def reference_inhom(problem: InhomProblem, time: Time, fine_factor: int = 64) -> State:
    """Variation of constants for ``A₁ + A₂`` on the forcing refined by ``fine_factor``."""
    _check_horizon(time, problem.f1)

    family = EvolutionFamily.from_generator(problem.a1 + problem.a2, label="T")
    forcing = (problem.f1 + problem.f2).refine(fine_factor)

    return family(time) @ problem.u0 + duhamel(family, forcing, time)


def inhom_convergence_study(
    problem: InhomProblem,
    scheme: Scheme,
    time: Time,
    ns: t.Sequence[int],
    *,
    fine_factor: int = 64,
    norm: NormKind = "spectral",
    threads: t.Optional[int] = None,
) -> ConvergenceReport:
    """Errors of :func:`split_solve_inhom` against :func:`reference_inhom`."""
    ns = tuple(int(n) for n in ns)
    reference = reference_inhom(problem, time, fine_factor)

    def error_at(n: int) -> float:
        error = split_solve_inhom(problem, scheme, time, n) - reference
        return operator_norm(error[:, None], norm=norm)

    errors = run_parallel(error_at, ns, threads=threads)
    fit = fit_order(ns, errors)

    _log.info("Inhomogeneous %s splitting: fitted order %.4f.", scheme.value, fit.order)
    return ConvergenceReport(
        scheme=scheme,
        t_final=float(time),
        pairs=tuple(zip(ns, (float(e) for e in errors))),
        fitted_order=fit.order,
        fit_residual=fit.residual,
    )


class AugmentedFamily:
    """Matrix form of ``𝒯_i`` on ``E × G × G`` where ``G`` stacks the grid values."""

    def __init__(
        self,
        a: npt.ArrayLike,
        *,
        count: int,
        delta_s: float,
        active: t.Literal[1, 2],
        coupled: bool = True,
        label: str = "",
    ):
        if active not in (1, 2):
            raise InputError(f"active sub-generator must be 1 or 2, got {active!r}.")
        if count < 2 or delta_s <= 0:
            raise DiscretizationError(
                f"need at least 2 nodes and positive spacing, got {count}, {delta_s}."
            )

        self.semigroup = EvolutionFamily.from_generator(a, label=f"T{active}")
        self.count = count
        self.delta_s = float(delta_s)
        self.active = active
        # without the point evaluation the inhomogeneity never reaches the state
        self.coupled = coupled
        self.label = label or f"augmented{active}"

    def __repr__(self):
        return (
            f"<AugmentedFamily {self.label} dim={self.dim} count={self.count} "
            f"coupled={self.coupled}>"
        )

    @classmethod
    def from_problem(cls, problem: InhomProblem, active: t.Literal[1, 2], *, coupled: bool = True):
        return cls(
            problem.a1 if active == 1 else problem.a2,
            count=problem.f1.count,
            delta_s=problem.f1.delta_s,
            active=active,
            coupled=coupled,
        )

    @property
    def state_dim(self) -> int:
        return self.semigroup.dim

    @property
    def grid_dim(self) -> int:
        return self.count * self.state_dim

    @property
    def dim(self) -> int:
        return self.state_dim + 2 * self.grid_dim

    def weights(self) -> npt.NDArray[np.float64]:
        return np.concatenate([np.ones(self.state_dim), np.full(2 * self.grid_dim, self.delta_s)])

    def compatible(self, other: AugmentedFamily) -> bool:
        return (self.state_dim, self.count) == (other.state_dim, other.count) and math.isclose(
            self.delta_s, other.delta_s, rel_tol=1e-12
        )

    def steps(self, h: Time) -> int:
        m = grid_offset(h, self.delta_s)
        if m is None:
            raise DiscretizationError(
                f"step {h!r} is not a multiple of the grid spacing {self.delta_s!r}."
            )
        if m > self.count - 1:
            raise DomainError(h, (self.count - 1) * self.delta_s, what="the augmented grid")
        return m

    def shift(self, h: Time) -> DenseOperator:
        m = self.steps(h)
        return np.kron(np.eye(self.count, k=m), np.eye(self.state_dim))

    def quadrature(self, h: Time) -> DenseOperator:
        """Trapezoid weights times ``T_i(h − jΔs)``; the same sum :func:`duhamel` forms."""
        m = self.steps(h)
        d = self.state_dim
        q = np.zeros((d, self.grid_dim))

        if not self.coupled or m == 0:
            return q

        step = self.semigroup(self.delta_s)
        power = np.eye(d)
        for j in range(m, -1, -1):
            weight = self.delta_s / 2 if j in (0, m) else self.delta_s
            q[:, j * d : (j + 1) * d] = weight * power
            power = step @ power

        return q

    def __call__(self, h: Time) -> DenseOperator:
        d, g = self.state_dim, self.grid_dim
        out = np.eye(self.dim)
        active_slot = slice(d, d + g) if self.active == 1 else slice(d + g, d + 2 * g)

        out[:d, :d] = self.semigroup(h)
        out[:d, active_slot] = self.quadrature(h)
        out[active_slot, active_slot] = self.shift(h)
        return out

    def as_family(self) -> EvolutionFamily:
        return EvolutionFamily(self.dim, self, label=self.label)


def augmented_norm(m: npt.ArrayLike, weights: npt.ArrayLike, *, norm: GridNorm = "sup") -> float:
    """Operator norm on ``E × G × G`` for the sup norm or the ``Δs``-weighted ℓ¹ norm."""
    m = np.abs(as_operator(m))

    if norm == "sup":
        return float(m.sum(axis=1).max())
    if norm == "l1":
        w = np.asarray(weights, dtype=np.float64)
        return float((w[:, None] * m / w[None, :]).sum(axis=0).max())

    raise InputError(f"unknown grid norm {norm!r}, expected 'sup' or 'l1'.")


def _check_augmented_pair(f1: AugmentedFamily, f2: AugmentedFamily):
    if (f1.active, f2.active) != (1, 2):
        raise DiscretizationError("expected the families of sub-generators 1 and 2, in order.")
    if not f1.compatible(f2):
        raise DiscretizationError(f"{f1!r} and {f2!r} do not share a discretization.")


def verify_lp_sum_identities(
    f1: AugmentedFamily, f2: AugmentedFamily, h: Time, k: int, *, tol: float = TOL_LP_SUMS
) -> IdentityReport:
    """Compare the closed-form sums of the top row of ``(𝒯₂(h)𝒯₁(h))^k`` with the product.

    (∗)  = Σ_j (T₂T₁)^j T₂ Q₁ L^{k−1−j}
    (∗∗) = Σ_j (T₂T₁)^j Q₂ L^{k−1−j}
    """
    _check_augmented_pair(f1, f2)
    if k < 1:
        raise InputError(f"power must be at least 1, got {k}.")

    d, g = f1.state_dim, f1.grid_dim
    t1, t2 = f1.semigroup(h), f2.semigroup(h)
    q1, q2 = f1.quadrature(h), f2.quadrature(h)
    shift = f1.shift(h)

    diagonal = t2 @ t1
    diag_powers = [np.eye(d)]
    shift_powers = [np.eye(g)]
    for _ in range(k - 1):
        diag_powers.append(diag_powers[-1] @ diagonal)
        shift_powers.append(shift_powers[-1] @ shift)

    star = sum(diag_powers[j] @ t2 @ q1 @ shift_powers[k - 1 - j] for j in range(k))
    star_star = sum(diag_powers[j] @ q2 @ shift_powers[k - 1 - j] for j in range(k))

    product = np.linalg.matrix_power(f2(h) @ f1(h), k)
    deviations = (
        relative_deviation(star, product[:d, d : d + g]),
        relative_deviation(star_star, product[:d, d + g :]),
    )

    _log.debug("L^p sums at h=%g, k=%d: deviations %.3e, %.3e.", h, k, *deviations)
    return IdentityReport(
        "lp-sums", ((float(h), float(k), 1.0), (float(h), float(k), 2.0)), deviations, tol
    )


def sample_augmented_norms(
    scheme: Scheme,
    f1: AugmentedFamily,
    f2: AugmentedFamily,
    t_grid: t.Sequence[Time],
    n_grid: t.Sequence[int],
    *,
    norm: GridNorm = "sup",
    threads: t.Optional[int] = None,
) -> StabilitySampleSet:
    """Norms of the augmented products; ``(t, n)`` pairs off the grid are skipped."""
    _check_augmented_pair(f1, f2)

    substep = 2 if scheme is Scheme.STRANG else 1
    points = []
    for s, n in itertools.product(sorted(set(t_grid)), sorted(set(n_grid))):
        h = s / (n * substep)
        if grid_offset(h, f1.delta_s) is None or h > (f1.count - 1) * f1.delta_s:
            _log.warning("Skipping (t=%g, n=%d): step %g is off the grid.", s, n, h)
            continue
        points.append((float(s), int(n)))

    if not points:
        raise DiscretizationError("no (t, n) pair has a step on the grid.")

    family1, family2 = f1.as_family(), f2.as_family()
    weights = f1.weights()

    def sample(point: tuple[float, int]) -> tuple[float, int, float]:
        s, n = point
        product = split_evolve(scheme, family1, family2, s, n)
        return (s, n, augmented_norm(product, weights, norm=norm))

    return StabilitySampleSet(tuple(run_parallel(sample, points, threads=threads)))
