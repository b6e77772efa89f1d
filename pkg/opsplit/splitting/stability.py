# SPDX-License-Identifier: MIT
"""Stability of product formulas on finite sample grids.

The theorems bound ``‖productⁿ(t/n)‖`` for every ``t ≥ 0`` and ``n``; here the
bounds are certified on the sampled ``(t, n)`` pairs only, and every report says
which grid it covers.
"""

from __future__ import annotations

import dataclasses
import itertools
import logging
import math
import typing as t

import numpy as np
import numpy.typing as npt

from ..core.block import TriangularFamily
from ..core.errors import DimensionError, InputError
from ..core.linop import (
    TOL_SEMIGROUP,
    DenseOperator,
    EvolutionFamily,
    GrowthBound,
    NormKind,
    Time,
    as_operator,
    nilpotent_family,
    operator_norm,
)
from ..core.reports import IdentityReport
from ..internal.async_utils import run_parallel
from .errors import SchemeError
from .schemes import Scheme, split_evolve, split_step

__all__ = (
    "DEFAULT_T_GRID",
    "DEFAULT_N_GRID",
    "FAVARD_GRID",
    "FAVARD_GROWTH_LIMIT",
    "StabilitySampleSet",
    "StabilityFit",
    "sample_product_norms",
    "fit_growth_bound",
    "theorem_constants",
    "TriangularStabilityReport",
    "check_triangular_stability",
    "favard_quotient",
    "favard_growth",
    "FavardEstimate",
    "estimate_favard",
    "BoundedPerturbationReport",
    "check_bounded_perturbation_stability",
    "check_rescaling",
)

_log = logging.getLogger(__name__)

DEFAULT_T_GRID: tuple[float, ...] = (0.1, 0.25, 0.5, 1.0, 2.0, 5.0)
DEFAULT_N_GRID: tuple[int, ...] = tuple(2**i for i in range(9))
FAVARD_GRID: tuple[float, ...] = tuple(float(x) for x in np.logspace(-4, 0, 50))
FAVARD_GROWTH_LIMIT = 2.0

Sample = tuple[float, int, float]


def _coverage(t_values: t.Iterable[float], n_values: t.Iterable[int]) -> str:
    t_values, n_values = sorted(set(t_values)), sorted(set(n_values))
    if not t_values or not n_values:
        return "empty grid"

    return (
        f"certified on {len(t_values)} time(s) in [{t_values[0]:g}, {t_values[-1]:g}] and "
        f"{len(n_values)} step count(s) in [{n_values[0]}, {n_values[-1]}] only"
    )


@dataclasses.dataclass(frozen=True)
class StabilitySampleSet:
    samples: tuple[Sample, ...]

    def __post_init__(self):
        samples = tuple(sorted((float(s), int(n), float(v)) for s, n, v in self.samples))

        for s, n, v in samples:
            if not math.isfinite(v) or v < 0:
                raise InputError(f"sample norm at (t={s}, n={n}) must be finite and >= 0, got {v}.")

        keys = [(s, n) for s, n, _ in samples]
        if len(set(keys)) != len(keys):
            raise InputError("stability samples must have distinct (t, n) pairs.")

        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return len(self.samples)

    @property
    def grid(self) -> dict[str, list[float] | list[int]]:
        return {
            "t": sorted({s for s, _, _ in self.samples}),
            "n": sorted({n for _, n, _ in self.samples}),
        }

    @property
    def coverage(self) -> str:
        grid = self.grid
        return _coverage(grid["t"], grid["n"])  # type: ignore[arg-type]

    def to_json(self) -> list[dict[str, float]]:
        return [{"t": s, "n": n, "norm": v} for s, n, v in self.samples]


@dataclasses.dataclass(frozen=True)
class StabilityFit:
    bound: GrowthBound
    max_violation: float

    @property
    def satisfied(self) -> bool:
        return self.max_violation <= TOL_SEMIGROUP

    def to_json(self) -> dict[str, t.Any]:
        return {**self.bound.to_json(), "max_violation": self.max_violation}


def _check_grids(t_grid: t.Sequence[Time], n_grid: t.Sequence[int]):
    if not t_grid or not n_grid:
        raise InputError("time and step-count grids must be nonempty.")
    if any(s < 0 for s in t_grid):
        raise InputError(f"times must be nonnegative, got {list(t_grid)}.")
    if any(n < 1 for n in n_grid):
        raise InputError(f"step counts must be at least 1, got {list(n_grid)}.")


def sample_product_norms(
    scheme: Scheme,
    f1: EvolutionFamily,
    f2: EvolutionFamily,
    t_grid: t.Sequence[Time],
    n_grid: t.Sequence[int],
    *,
    norm: NormKind = "spectral",
    threads: t.Optional[int] = None,
) -> StabilitySampleSet:
    """``‖split_evolve(t, n)‖`` on the grid; the weighted form includes ``2^{-n}``."""
    _check_grids(t_grid, n_grid)
    points = list(itertools.product(sorted(set(t_grid)), sorted(set(n_grid))))

    def sample(point: tuple[float, int]) -> Sample:
        s, n = point
        return (s, n, operator_norm(split_evolve(scheme, f1, f2, s, n), norm=norm))

    samples = run_parallel(sample, points, threads=threads)
    _log.debug("Sampled %d %s product norms.", len(samples), scheme.value)

    return StabilitySampleSet(tuple(samples))


def _single_factor_norms(
    family: EvolutionFamily, t_grid: t.Sequence[Time], *, norm: NormKind
) -> StabilitySampleSet:
    return StabilitySampleSet(
        tuple((s, 1, operator_norm(family(s), norm=norm)) for s in sorted(set(t_grid)))
    )


def fit_growth_bound(sample_set: StabilitySampleSet) -> StabilityFit:
    """Envelope ``(M, ω)`` over the samples by the two-pass rule.

    ``M₀`` is the largest norm at ``t = 0`` (at least 1), ``ω`` the largest
    nonnegative log-slope above ``M₀``, and ``M`` is then re-inflated to cover
    every sample.
    """
    if not len(sample_set):
        raise InputError("cannot fit a growth bound to an empty sample set.")

    samples = sample_set.samples
    m0 = max([1.0] + [v for s, _, v in samples if s == 0])

    slopes = [(math.log(v) - math.log(m0)) / s for s, _, v in samples if s > 0 and v > 0]
    omega = max([0.0] + slopes)
    big_m = max([1.0] + [v * math.exp(-omega * s) for s, _, v in samples])
    bound = GrowthBound(big_m, omega)

    violation = max(
        [math.log(v) - math.log(big_m) - omega * s for s, _, v in samples if v > 0], default=0.0
    )

    _log.debug("Fitted M=%.6g, omega=%.6g over %d samples.", big_m, omega, len(samples))
    return StabilityFit(bound=bound, max_violation=violation)


def theorem_constants(mp: float, omegap: float, k: float) -> GrowthBound:
    """``M = 2M′³K`` and ``ω = ω′ + |ω′| + 1``; ``M`` is kept at least 1."""
    if mp < 1:
        raise InputError(f"M' must be at least 1, got {mp}.")
    if k <= 0:
        raise InputError(f"K must be positive, got {k}.")

    return GrowthBound(max(1.0, 2 * mp**3 * k), omegap + abs(omegap) + 1)


def _combine(fits: t.Iterable[StabilityFit]) -> StabilityFit:
    fits = list(fits)
    bound = GrowthBound(max(f.bound.M for f in fits), max(f.bound.omega for f in fits))
    return StabilityFit(bound=bound, max_violation=max(f.max_violation for f in fits))


def _partial_power_norms(
    scheme: Scheme,
    f1: EvolutionFamily,
    f2: EvolutionFamily,
    t_grid: t.Sequence[Time],
    n_grid: t.Sequence[int],
    *,
    norm: NormKind,
    threads: t.Optional[int],
) -> StabilitySampleSet:
    """``‖split_step(t/n)^j‖`` at ``(jt/n, j)`` for every ``j ≤ n`` on the grid."""
    points = list(itertools.product(sorted(set(t_grid)), sorted(set(n_grid))))

    def powers(point: tuple[float, int]) -> list[Sample]:
        s, n = point
        h = s / n
        step = split_step(scheme, f1, f2, h)
        acc = np.eye(f1.dim)
        out = []
        for j in range(1, n + 1):
            acc = acc @ step
            out.append((j * h, j, operator_norm(acc, norm=norm)))
        return out

    samples: dict[tuple[float, int], float] = {}
    for s, j, v in itertools.chain.from_iterable(run_parallel(powers, points, threads=threads)):
        samples.setdefault((s, j), v)

    return StabilitySampleSet(tuple((s, j, v) for (s, j), v in samples.items()))


@dataclasses.dataclass(frozen=True)
class TriangularStabilityReport:
    scheme: Scheme
    diagonal_fit: StabilityFit
    favard_K: float
    constants: t.Optional[GrowthBound]
    samples: StabilitySampleSet
    offdiagonal: StabilitySampleSet
    product_fit: StabilityFit
    satisfied: bool

    def to_json(self) -> dict[str, t.Any]:
        return {
            "scheme": self.scheme.value,
            "grid": self.samples.grid,
            "coverage": self.samples.coverage,
            "samples": self.samples.to_json(),
            "offdiagonal_samples": self.offdiagonal.to_json(),
            "fit": self.product_fit.bound.to_json(),
            "diagonal_fit": self.diagonal_fit.bound.to_json(),
            "theorem_constants": self.constants.to_json() if self.constants else None,
            "favard_K": self.favard_K,
            "satisfied": self.satisfied,
        }


def check_triangular_stability(
    f1: TriangularFamily,
    f2: TriangularFamily,
    t_grid: t.Sequence[Time] = DEFAULT_T_GRID,
    n_grid: t.Sequence[int] = DEFAULT_N_GRID,
    *,
    scheme: Scheme = Scheme.SEQUENTIAL,
    k_grid: t.Sequence[Time] = FAVARD_GRID,
    norm: NormKind = "spectral",
    threads: t.Optional[int] = None,
) -> TriangularStabilityReport:
    """Measure the hypotheses of the triangular stability theorems and test their conclusion.

    ``M′, ω′`` are fitted to every diagonal partial power and single factor the
    off-diagonal sum runs through, ``K`` is measured on ``k_grid`` and at each
    step size, and the conclusion ``‖(⋆)‖ ≤ M e^{ωt}`` is checked on the
    upper right block of every sampled product.
    """
    if scheme is Scheme.STRANG:
        raise SchemeError("triangular stability covers the sequential and weighted forms.")
    if (f1.dim_e, f1.dim_f) != (f2.dim_e, f2.dim_f):
        raise DimensionError("triangular families act on different spaces.")

    _check_grids(t_grid, n_grid)
    steps = sorted({s / n for s, n in itertools.product(t_grid, n_grid) if s > 0})

    diagonal_fit = _combine(
        [
            fit_growth_bound(
                _partial_power_norms(
                    scheme, f1.T, f2.T, t_grid, n_grid, norm=norm, threads=threads
                )
            ),
            fit_growth_bound(
                _partial_power_norms(
                    scheme, f1.S, f2.S, t_grid, n_grid, norm=norm, threads=threads
                )
            ),
            *(
                fit_growth_bound(_single_factor_norms(family, [*t_grid, *steps], norm=norm))
                for family in (f1.T, f1.S, f2.T, f2.S)
            ),
        ]
    )
    mp, omegap = diagonal_fit.bound.M, diagonal_fit.bound.omega

    k = max(
        operator_norm(f.offdiagonal(s), norm=norm) / (s * math.exp(omegap * s))
        for f in (f1, f2)
        for s in sorted({*k_grid, *steps})
        if s > 0
    )

    full1, full2 = f1.as_family(), f2.as_family()
    dim_e = f1.dim_e
    points = list(itertools.product(sorted(set(t_grid)), sorted(set(n_grid))))

    def sample(point: tuple[float, int]) -> tuple[Sample, Sample]:
        s, n = point
        product = split_evolve(scheme, full1, full2, s, n)
        return (
            (s, n, operator_norm(product, norm=norm)),
            (s, n, operator_norm(product[:dim_e, dim_e:], norm=norm)),
        )

    measured = run_parallel(sample, points, threads=threads)
    samples = StabilitySampleSet(tuple(full for full, _ in measured))
    offdiagonal = StabilitySampleSet(tuple(corner for _, corner in measured))
    product_fit = fit_growth_bound(samples)

    if k == 0:
        _log.info("Off-diagonal blocks vanish on the grid, checking the diagonal bound only.")
        constants = None
        satisfied = all(diagonal_fit.bound.dominates(v, s) for s, _, v in samples.samples)
    else:
        constants = theorem_constants(mp, omegap, k)
        satisfied = all(constants.dominates(v, s) for s, _, v in offdiagonal.samples)

    _log.info(
        "Triangular %s stability: M'=%.4g, omega'=%.4g, K=%.4g, satisfied=%s (%s).",
        scheme.value,
        mp,
        omegap,
        k,
        satisfied,
        samples.coverage,
    )

    return TriangularStabilityReport(
        scheme=scheme,
        diagonal_fit=diagonal_fit,
        favard_K=k,
        constants=constants,
        samples=samples,
        offdiagonal=offdiagonal,
        product_fit=product_fit,
        satisfied=satisfied,
    )


def _favard_quotients(
    r: t.Callable[[Time], npt.ArrayLike], t_grid: t.Sequence[Time], *, norm: NormKind
) -> list[tuple[float, float]]:
    grid = sorted(set(float(s) for s in t_grid))

    if not grid:
        raise InputError("the Favard grid must be nonempty.")
    if grid[0] <= 0 or grid[-1] > 1:
        raise InputError(f"Favard grid points must lie in (0, 1], got [{grid[0]}, {grid[-1]}].")

    return [(s, operator_norm(as_operator(r(s)), norm=norm) / s) for s in grid]


def favard_quotient(
    r: t.Callable[[Time], npt.ArrayLike],
    t_grid: t.Sequence[Time] = FAVARD_GRID,
    *,
    norm: NormKind = "spectral",
) -> float:
    """``max ‖R(t)‖/t`` over the grid, the empirical ``K`` in ``‖R(t)‖ ≤ Kt``."""
    return max(q for _, q in _favard_quotients(r, t_grid, norm=norm))


def _decade_growth(quotients: list[tuple[float, float]]) -> float:
    (t_min, q_min), *rest = quotients
    if not rest:
        return 1.0

    # the grid point closest to one decade above the smallest time
    _, q_up = min(rest, key=lambda p: abs(math.log10(p[0]) - math.log10(10 * t_min)))

    if q_up == 0:
        return 1.0 if q_min == 0 else math.inf
    return q_min / q_up


def favard_growth(
    r: t.Callable[[Time], npt.ArrayLike],
    t_grid: t.Sequence[Time] = FAVARD_GRID,
    *,
    norm: NormKind = "spectral",
) -> float:
    """Growth of ``‖R(t)‖/t`` across the smallest decade of the grid."""
    return _decade_growth(_favard_quotients(r, t_grid, norm=norm))


@dataclasses.dataclass(frozen=True)
class FavardEstimate:
    K: float
    growth: float

    @property
    def bounded(self) -> bool:
        return self.growth <= FAVARD_GROWTH_LIMIT

    def to_json(self) -> dict[str, t.Any]:
        return {"K": self.K, "growth": self.growth, "bounded": self.bounded}


def estimate_favard(
    r: t.Callable[[Time], npt.ArrayLike],
    t_grid: t.Sequence[Time] = FAVARD_GRID,
    *,
    norm: NormKind = "spectral",
) -> FavardEstimate:
    quotients = _favard_quotients(r, t_grid, norm=norm)
    estimate = FavardEstimate(K=max(q for _, q in quotients), growth=_decade_growth(quotients))

    if not estimate.bounded:
        _log.warning(
            "Quotient ||R(t)||/t grows by %.3g across the smallest decade, not Favard-bounded.",
            estimate.growth,
        )

    return estimate


@dataclasses.dataclass(frozen=True)
class BoundedPerturbationReport:
    base_fit: StabilityFit
    sequential: StabilitySampleSet
    sequential_fit: StabilityFit
    weighted: StabilitySampleSet
    weighted_fit: StabilityFit
    coupling_norm: float

    @property
    def satisfied(self) -> bool:
        return self.sequential_fit.satisfied and self.weighted_fit.satisfied

    @property
    def omega(self) -> float:
        return max(self.sequential_fit.bound.omega, self.weighted_fit.bound.omega)

    def to_json(self) -> dict[str, t.Any]:
        return {
            "grid": self.sequential.grid,
            "coverage": self.sequential.coverage,
            "base_fit": self.base_fit.bound.to_json(),
            "coupling_norm": self.coupling_norm,
            "sequential": {
                "samples": self.sequential.to_json(),
                "fit": self.sequential_fit.bound.to_json(),
            },
            "weighted": {
                "samples": self.weighted.to_json(),
                "fit": self.weighted_fit.bound.to_json(),
            },
            "satisfied": self.satisfied,
        }


def _lower_left_generator(c: DenseOperator, dim: int) -> DenseOperator:
    if c.shape == (dim, dim):
        return c

    dim_f, dim_e = c.shape
    if dim_e + dim_f != dim:
        raise DimensionError(
            f"coupling of shape {c.shape} does not fit a block layout of total size {dim}."
        )

    full = np.zeros((dim, dim))
    full[dim_e:, :dim_e] = c
    return full


def check_bounded_perturbation_stability(
    family: EvolutionFamily,
    c: npt.ArrayLike,
    t_grid: t.Sequence[Time] = DEFAULT_T_GRID,
    n_grid: t.Sequence[int] = DEFAULT_N_GRID,
    *,
    norm: NormKind = "spectral",
    threads: t.Optional[int] = None,
) -> BoundedPerturbationReport:
    """Sample ``(𝒮(h)𝒯(h))ⁿ`` and its weighted form for ``𝒮(t) = I + t𝒞``.

    ``c`` is either the lower-left block ``C`` or the full nilpotent ``𝒞``.
    """
    c = as_operator(c, name="C")
    generator = _lower_left_generator(c, family.dim)
    coupling = nilpotent_family(generator, label="exp(tC)")

    _check_grids(t_grid, n_grid)

    base_fit = fit_growth_bound(_single_factor_norms(family, t_grid, norm=norm))
    sequential = sample_product_norms(
        Scheme.SEQUENTIAL, family, coupling, t_grid, n_grid, norm=norm, threads=threads
    )
    weighted = sample_product_norms(
        Scheme.WEIGHTED, family, coupling, t_grid, n_grid, norm=norm, threads=threads
    )

    return BoundedPerturbationReport(
        base_fit=base_fit,
        sequential=sequential,
        sequential_fit=fit_growth_bound(sequential),
        weighted=weighted,
        weighted_fit=fit_growth_bound(weighted),
        coupling_norm=operator_norm(generator, norm=norm),
    )


def check_rescaling(
    scheme: Scheme,
    f1: EvolutionFamily,
    f2: EvolutionFamily,
    bound: GrowthBound,
    hs: t.Sequence[Time],
    ks: t.Sequence[int],
    *,
    norm: NormKind = "spectral",
) -> IdentityReport:
    """``‖split_step(h)^k‖ ≤ M e^{ωhk}`` with ``(M, ω)`` fitted in the ``(t, n)`` form."""
    samples = []
    deviations = []

    for h, k in itertools.product(hs, ks):
        step = split_step(scheme, f1, f2, h)
        value = operator_norm(np.linalg.matrix_power(step, int(k)), norm=norm)
        samples.append((float(h), float(k)))
        deviations.append(max(0.0, value / bound.value(h * k) - 1))

    return IdentityReport("rescaling", tuple(samples), tuple(deviations), TOL_SEMIGROUP)
