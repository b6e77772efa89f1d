# SPDX-License-Identifier: MIT

import math

import numpy as np
import numpy.testing as npt
import pytest

from opsplit.applications.errors import DiscretizationError, DomainError
from opsplit.applications.grid import GridFunction
from opsplit.applications.inhom import (
    AugmentedFamily,
    InhomProblem,
    augmented_apply,
    augmented_norm,
    duhamel,
    inhom_convergence_study,
    reference_inhom,
    sample_augmented_norms,
    split_solve_inhom,
    verify_lp_sum_identities,
)
from opsplit.core.errors import DimensionError, InputError
from opsplit.core.linop import EvolutionFamily, check_semigroup_law
from opsplit.splitting.schemes import Scheme, split_evolve
from opsplit.splitting.stability import fit_growth_bound

NS = (4, 8, 16, 32, 64, 128, 256)


def _decay() -> EvolutionFamily:
    return EvolutionFamily.from_generator([[-1.0]])


def test_duhamel_of_constant_forcing():
    f = GridFunction.builtin("const:1", 65, 1 / 64, 1)

    for time in (0.5, 0.505, 1.0):
        npt.assert_allclose(duhamel(_decay(), f, time), [1 - math.exp(-time)], rtol=1e-4)

    npt.assert_array_equal(duhamel(_decay(), f, 0.0), [0.0])


def test_duhamel_rejects_times_past_the_horizon():
    f = GridFunction.builtin("const:1", 65, 1 / 64, 1)

    with pytest.raises(DomainError, match="horizon"):
        duhamel(_decay(), f, 1.5)
    with pytest.raises(DimensionError):
        duhamel(EvolutionFamily.from_generator(np.eye(2)), f, 0.5)


def test_augmented_apply_shifts_only_the_active_inhomogeneity():
    f1 = GridFunction.builtin("ramp", 65, 1 / 64, 1)
    f2 = GridFunction.builtin("const:1", 65, 1 / 64, 1)

    state = augmented_apply(_decay(), _decay(), f1, f2, np.array([1.0]), 0.25, active=1)

    npt.assert_array_equal(state.f1.values, f1.shift(0.25).values)
    assert state.f2 is f2
    npt.assert_allclose(state.u, math.exp(-0.25) + duhamel(_decay(), f1, 0.25))

    with pytest.raises(InputError):
        augmented_apply(_decay(), _decay(), f1, f2, np.array([1.0]), 0.25, active=3)


def test_problem_validation():
    f = GridFunction.zeros(5, 0.25, 1)

    with pytest.raises(DimensionError):
        InhomProblem(np.eye(2), np.eye(2), f, f, np.array([1.0]))
    with pytest.raises(DiscretizationError):
        InhomProblem([[0.0]], [[0.0]], f, GridFunction.zeros(6, 0.25, 1), np.array([1.0]))


def test_reference_matches_the_analytic_solution(scalar_inhom):
    for time in (0.25, 1.0):
        assert reference_inhom(scalar_inhom, time)[0] == pytest.approx(
            1 + math.exp(-time), abs=1e-8
        )


def test_split_solve_past_the_horizon(scalar_inhom):
    with pytest.raises(DomainError):
        split_solve_inhom(scalar_inhom, Scheme.SEQUENTIAL, 2.0, 4)
    with pytest.raises(InputError):
        split_solve_inhom(scalar_inhom, Scheme.SEQUENTIAL, 1.0, 0)


@pytest.mark.parametrize(
    ("scheme", "low", "high"),
    [(Scheme.SEQUENTIAL, 0.8, 1.2), (Scheme.STRANG, 1.7, 2.3), (Scheme.WEIGHTED, 1.7, 2.3)],
)
def test_inhomogeneous_orders(scalar_inhom, scheme, low, high):
    report = inhom_convergence_study(scalar_inhom, scheme, 1.0, NS, threads=1)

    assert low <= report.fitted_order <= high
    assert report.scheme is scheme


def test_sequential_split_matches_its_fixed_point(scalar_inhom):
    # one Lie step maps u to e^{-h}u + h, so u_n is known in closed form
    h = 1 / 8
    expected = 2 * math.exp(-1.0) + h * (1 - math.exp(-1.0)) / (1 - math.exp(-h))

    split = split_solve_inhom(scalar_inhom, Scheme.SEQUENTIAL, 1.0, 8)
    assert split[0] == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("scheme", list(Scheme))
def test_zero_inhomogeneity_reduces_to_the_homogeneous_split(rng, scheme):
    a1, a2 = rng.standard_normal((2, 2)), rng.standard_normal((2, 2))
    ramp = GridFunction.builtin("ramp", 65, 1 / 64, 2)
    problem = InhomProblem(a1, a2, ramp, ramp, np.array([1.0, -0.5])).homogeneous()

    assert not problem.f1.values.any()

    f1, f2 = problem.families
    expected = split_evolve(scheme, f1, f2, 1.0, 8) @ problem.u0
    split = split_solve_inhom(problem, scheme, 1.0, 8)
    npt.assert_allclose(split, expected, rtol=1e-12, atol=1e-12)


@pytest.fixture
def augmented_pair():
    return (
        AugmentedFamily([[-0.7]], count=64, delta_s=1 / 64, active=1),
        AugmentedFamily([[0.3]], count=64, delta_s=1 / 64, active=2),
    )


def test_augmented_family_layout(augmented_pair):
    f1, _ = augmented_pair

    assert (f1.state_dim, f1.grid_dim, f1.dim) == (1, 64, 129)
    npt.assert_array_equal(f1(0.0), np.eye(129))
    assert f1.weights()[0] == 1.0
    assert f1.weights()[1] == 1 / 64


def test_augmented_family_is_a_semigroup_on_the_grid(augmented_pair):
    for family in augmented_pair:
        report = check_semigroup_law(family.as_family(), [(1 / 64, 2 / 64), (4 / 64, 4 / 64)])
        assert report.passed


def test_augmented_matrix_agrees_with_augmented_apply():
    f1 = GridFunction.builtin("sine:1", 64, 1 / 64, 1)
    f2 = GridFunction.builtin("ramp", 64, 1 / 64, 1)
    family = AugmentedFamily([[-0.7]], count=64, delta_s=1 / 64, active=1)

    vector = np.concatenate([[1.0], f1.stacked(), f2.stacked()])
    moved = family(0.125) @ vector

    state = augmented_apply(
        family.semigroup, _decay(), f1, f2, np.array([1.0]), 0.125, active=1
    )
    npt.assert_allclose(moved[:1], state.u, rtol=1e-12)
    npt.assert_allclose(moved[1:65], state.f1.stacked())
    npt.assert_array_equal(moved[65:], f2.stacked())


def test_augmented_family_from_problem(scalar_inhom):
    family = AugmentedFamily.from_problem(scalar_inhom, 2, coupled=False)

    assert (family.state_dim, family.count, family.active) == (1, 4097, 2)
    assert family.delta_s == 1 / 4096
    assert not family.coupled


def test_uncoupled_family_has_no_quadrature():
    family = AugmentedFamily([[-1.0]], count=8, delta_s=0.125, active=1, coupled=False)

    npt.assert_array_equal(family.quadrature(0.25), np.zeros((1, 8)))


def test_augmented_steps_must_be_on_the_grid(augmented_pair):
    f1, _ = augmented_pair

    with pytest.raises(DiscretizationError):
        f1(0.3 / 64)
    with pytest.raises(DomainError):
        f1(2.0)


def test_lp_sum_identities(augmented_pair):
    f1, f2 = augmented_pair

    for k in (1, 8, 32):
        report = verify_lp_sum_identities(f1, f2, 1 / 64, k)
        assert report.name == "lp-sums"
        assert report.passed, (k, report.deviations)


def test_lp_sum_identities_need_an_ordered_pair(augmented_pair):
    f1, f2 = augmented_pair

    with pytest.raises(DiscretizationError):
        verify_lp_sum_identities(f2, f1, 1 / 64, 2)
    with pytest.raises(InputError):
        verify_lp_sum_identities(f1, f2, 1 / 64, 0)


def test_augmented_norms():
    weights = np.array([1.0, 0.5, 0.5])
    m = np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])

    assert augmented_norm(m, weights, norm="sup") == 3.0
    # the u column gains nothing, the first grid column carries 2 / 0.5 on top of its own 1
    assert augmented_norm(m, weights, norm="l1") == 5.0

    with pytest.raises(InputError):
        augmented_norm(m, weights, norm="l2")  # type: ignore[arg-type]


def test_sample_augmented_norms_skips_off_grid_pairs(augmented_pair, caplog):
    samples = sample_augmented_norms(
        Scheme.SEQUENTIAL, *augmented_pair, (0.3, 0.5), (1, 2), threads=1
    )

    assert [(s, n) for s, n, _ in samples.samples] == [(0.5, 1), (0.5, 2)]
    assert "off the grid" in caplog.text


def test_sample_augmented_norms_needs_a_grid_step(augmented_pair):
    with pytest.raises(DiscretizationError):
        sample_augmented_norms(Scheme.SEQUENTIAL, *augmented_pair, (0.3,), (1,), threads=1)


@pytest.mark.parametrize("forcing", ["const:1", "sine:1"])
def test_reference_refines_at_second_order(forcing):
    problem = InhomProblem(
        [[-1.0]],
        [[0.0]],
        GridFunction.zeros(9, 0.125, 1),
        GridFunction.builtin(forcing, 9, 0.125, 1),
        np.array([2.0]),
    )
    references = [reference_inhom(problem, 1.0, f)[0] for f in (1, 2, 4, 8, 16)]
    gaps = [abs(a - b) for a, b in zip(references, references[1:])]

    for coarse, fine in zip(gaps, gaps[1:]):
        assert 3.5 <= coarse / fine <= 4.5


@pytest.mark.parametrize("norm", ["sup", "l1"])
def test_augmented_products_admit_a_growth_bound(augmented_pair, norm):
    samples = sample_augmented_norms(
        Scheme.SEQUENTIAL, *augmented_pair, (0.25, 0.5), (1, 2, 4, 8, 16), norm=norm, threads=1
    )
    fit = fit_growth_bound(samples)

    assert len(samples) == 10
    assert fit.satisfied
    assert fit.bound.M == pytest.approx(1.0)
    assert 0 < fit.bound.omega <= 2.5
