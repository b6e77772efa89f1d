# SPDX-License-Identifier: MIT

import io

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opsplit.core.errors import DimensionError, InputError
from opsplit.core.linop import EvolutionFamily, expm, relative_deviation
from opsplit.splitting.errors import DegenerateFitError, SchemeError
from opsplit.splitting.schemes import (
    ConvergenceReport,
    Scheme,
    convergence_study,
    fit_order,
    split_evolve,
    split_step,
    step_family,
)

NS = (4, 8, 16, 32, 64, 128, 256)

A1 = np.array([[0.0, 1.0], [0.0, 0.0]])
A2 = np.array([[0.0, 0.0], [1.0, 0.0]])


def _pair(a1, a2):
    return (
        EvolutionFamily.from_generator(a1, label="A1"),
        EvolutionFamily.from_generator(a2, label="A2"),
    )


def test_scheme_parse():
    assert Scheme.parse("Strang") is Scheme.STRANG
    assert Scheme.parse(" lie ") is Scheme.SEQUENTIAL
    assert Scheme.parse(Scheme.WEIGHTED) is Scheme.WEIGHTED

    with pytest.raises(SchemeError, match="sequential, strang, weighted"):
        Scheme.parse("yoshida")


def test_split_step_forms():
    f1, f2 = _pair(A1, A2)
    h = 0.3

    npt.assert_allclose(split_step(Scheme.SEQUENTIAL, f1, f2, h), f2(h) @ f1(h))
    npt.assert_allclose(split_step(Scheme.STRANG, f1, f2, h), f1(h / 2) @ f2(h) @ f1(h / 2))
    npt.assert_allclose(
        split_step(Scheme.WEIGHTED, f1, f2, h), (f1(h) @ f2(h) + f2(h) @ f1(h)) / 2
    )


def test_split_step_of_zero_is_identity():
    f1, f2 = _pair(A1, A2)

    for scheme in Scheme:
        npt.assert_array_equal(split_step(scheme, f1, f2, 0.0), np.eye(2))


def test_split_evolve_with_one_step_is_one_step():
    f1, f2 = _pair(A1, A2)

    npt.assert_allclose(
        split_evolve(Scheme.STRANG, f1, f2, 0.7, 1), split_step(Scheme.STRANG, f1, f2, 0.7)
    )


def test_split_evolve_validates():
    f1, f2 = _pair(A1, A2)

    with pytest.raises(InputError):
        split_evolve(Scheme.SEQUENTIAL, f1, f2, 1.0, 0)
    with pytest.raises(InputError):
        split_evolve(Scheme.SEQUENTIAL, f1, f2, -1.0, 2)
    with pytest.raises(DimensionError):
        split_evolve(Scheme.SEQUENTIAL, f1, EvolutionFamily.from_generator(np.eye(3)), 1.0, 2)


@given(
    st.integers(min_value=0, max_value=2**32 - 1),
    st.sampled_from(list(Scheme)),
    st.integers(min_value=1, max_value=64),
    st.floats(min_value=0, max_value=2),
)
def test_commuting_pairs_split_exactly(seed, scheme, n, time):
    rng = np.random.Generator(np.random.PCG64(seed))
    a1, a2 = np.diag(rng.standard_normal(3)), np.diag(rng.standard_normal(3))
    f1, f2 = _pair(a1, a2)

    assert relative_deviation(split_evolve(scheme, f1, f2, time, n), expm(a1 + a2, time)) <= 1e-12


def test_step_family_is_the_one_step_map():
    f1, f2 = _pair(A1, A2)
    family = step_family(Scheme.WEIGHTED, f1, f2)

    assert family.dim == 2
    npt.assert_allclose(family(0.25), split_step(Scheme.WEIGHTED, f1, f2, 0.25))


def test_fit_order_recovers_slope():
    ns = [4, 8, 16, 32]
    fit = fit_order(ns, [3.0 / n**2 for n in ns])

    assert fit.order == pytest.approx(2.0)
    assert fit.residual == pytest.approx(0.0, abs=1e-12)
    assert fit.used == 4


def test_fit_order_drops_errors_below_the_floor(caplog):
    fit = fit_order([4, 8, 16, 32], [1e-2, 5e-3, 2.5e-3, 1e-16])

    assert fit.used == 3
    assert fit.order == pytest.approx(1.0)
    assert "rounding floor" in caplog.text


def test_fit_order_degenerate():
    with pytest.raises(DegenerateFitError) as excinfo:
        fit_order([4, 8, 16], [1e-15, 1e-16, 1e-2])

    assert excinfo.value.usable == 1


@pytest.mark.parametrize(
    ("scheme", "order"),
    [(Scheme.SEQUENTIAL, 1.0), (Scheme.STRANG, 2.0), (Scheme.WEIGHTED, 2.0)],
)
def test_nilpotent_pair_orders(scheme, order):
    f1, f2 = _pair(A1, A2)
    report = convergence_study(scheme, f1, f2, expm(A1 + A2, 1.0), 1.0, NS, threads=1)

    assert report.fitted_order == pytest.approx(order, abs=0.15)
    assert report.ns == list(NS)
    assert all(b < a for a, b in zip(report.errors, report.errors[1:]))


def test_commuting_pair_study_is_degenerate():
    a1, a2 = np.diag([-1.0, -2.0]), np.diag([-2.0, -3.0])
    f1, f2 = _pair(a1, a2)

    with pytest.raises(DegenerateFitError):
        convergence_study(Scheme.SEQUENTIAL, f1, f2, expm(a1 + a2, 1.0), 1.0, NS, threads=1)


def test_convergence_study_validates_inputs():
    f1, f2 = _pair(A1, A2)
    reference = expm(A1 + A2, 1.0)

    with pytest.raises(InputError):
        convergence_study(Scheme.SEQUENTIAL, f1, f2, reference, 1.0, (4, 8))
    with pytest.raises(InputError):
        convergence_study(Scheme.SEQUENTIAL, f1, f2, reference, 1.0, (4, 4, 8))
    with pytest.raises(DimensionError):
        convergence_study(Scheme.SEQUENTIAL, f1, f2, np.eye(3), 1.0, NS)


def test_convergence_report_csv():
    report = ConvergenceReport(Scheme.STRANG, 1.0, ((4, 0.5), (8, 0.125)), 2.0, 0.0)
    fp = io.StringIO()

    report.write_csv(fp)
    report.write_csv(fp, header=False)

    lines = fp.getvalue().splitlines()
    assert lines[0] == "scheme,t,n,error,fitted_order,fit_residual"
    assert lines[1] == "strang,1.0,4,0.5,2.0,0.0"
    assert len(lines) == 5
    assert report.to_json()["pairs"] == [{"n": 4, "error": 0.5}, {"n": 8, "error": 0.125}]


def test_nilpotent_pair_sequential_values():
    f1, f2 = _pair(A1, A2)

    npt.assert_allclose(
        split_step(Scheme.SEQUENTIAL, f1, f2, 1.0), [[1.0, 1.0], [1.0, 2.0]], atol=1e-14
    )
    npt.assert_allclose(
        split_evolve(Scheme.SEQUENTIAL, f1, f2, 1.0, 2),
        [[5 / 4, 9 / 8], [9 / 8, 29 / 16]],
        atol=1e-14,
    )


@pytest.mark.parametrize("seed", range(5))
def test_weighted_step_is_symmetric_in_the_pair(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    f1, f2 = _pair(rng.standard_normal((3, 3)), rng.standard_normal((3, 3)))

    for h in (0.0, 0.1, 0.7, 2.0):
        npt.assert_array_equal(
            split_step(Scheme.WEIGHTED, f1, f2, h), split_step(Scheme.WEIGHTED, f2, f1, h)
        )


@pytest.mark.parametrize("scheme", list(Scheme))
@pytest.mark.parametrize("h", [0.125, 0.25, 0.5])
def test_powers_of_the_step_are_the_evolution(scheme, h):
    f1, f2 = _pair(A1, A2)
    step = split_step(scheme, f1, f2, h)

    power = step
    for k in range(1, 33):
        npt.assert_array_equal(power, split_evolve(scheme, f1, f2, k * h, k))
        power = power @ step
