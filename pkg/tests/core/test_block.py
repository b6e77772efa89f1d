# SPDX-License-Identifier: MIT

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opsplit.core.block import (
    BlockOperator,
    check_block_powers,
    check_cocycle,
    check_condition_i,
    check_factorization,
    offdiagonal_quadrature,
    sequential_block_power,
    triangular_exp,
    weighted_block_power,
)
from opsplit.core.errors import DimensionError, InputError
from opsplit.core.linop import expm, relative_deviation


def _random_blocks(seed: int, scale: float = 1.0):
    rng = np.random.Generator(np.random.PCG64(seed))
    return (
        scale * rng.standard_normal((3, 3)) / np.sqrt(3),
        scale * rng.standard_normal((3, 2)) / np.sqrt(3),
        scale * rng.standard_normal((2, 2)) / np.sqrt(2),
    )


def _random_triangular(seed: int, label: str = "", *, scale: float = 1.0):
    return triangular_exp(*_random_blocks(seed, scale), label=label)


def test_block_operator_round_trips_dense():
    m = np.arange(25, dtype=float).reshape(5, 5)
    block = BlockOperator.from_dense(m, 3)

    assert (block.dim_e, block.dim_f) == (3, 2)
    npt.assert_array_equal(block.to_dense(), m)
    assert block.lower_left_max == 23.0


def test_block_operator_validates_shapes():
    with pytest.raises(DimensionError):
        BlockOperator(np.eye(2), np.zeros((2, 1)), np.zeros((2, 1)), np.eye(1))
    with pytest.raises(DimensionError):
        BlockOperator.from_dense(np.eye(3), 3)


def test_condition_i():
    assert check_condition_i(BlockOperator.upper(np.eye(2), np.ones((2, 1)), [[1.0]]))
    assert not check_condition_i(
        BlockOperator(np.eye(2), np.ones((2, 1)), [[0.0, 1e-3]], [[1.0]])
    )


def test_triangular_exp_scalar_offdiagonal():
    family = triangular_exp([[-1.0]], [[1.0]], [[0.0]])

    for s in (0.0, 0.5, 2.0):
        npt.assert_allclose(family.T(s), [[np.exp(-s)]], rtol=1e-14)
        npt.assert_allclose(family.S(s), [[1.0]])
        npt.assert_allclose(family.offdiagonal(s), [[1 - np.exp(-s)]], rtol=1e-12, atol=1e-16)


def test_triangular_family_vanishes_at_zero(triangular_pair):
    family, _ = triangular_pair

    assert np.abs(family.offdiagonal(0.0)).max() <= 1e-12
    npt.assert_array_equal(family.as_family()(0.0), np.eye(5))


def test_triangular_family_is_triangular(triangular_pair):
    for family in triangular_pair:
        for s in np.linspace(0, 5, 11):
            assert family(float(s)).lower_left_max <= 1e-12


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_cocycle_identity(seed):
    family = _random_triangular(seed)
    rng = np.random.Generator(np.random.PCG64(seed + 1))
    pairs = [tuple(row) for row in rng.uniform(0, 2, (4, 2))]

    assert check_cocycle(family, pairs).passed


def test_offdiagonal_matches_quadrature():
    a, p, b = np.array([[-1.0, 0.5], [0.0, -2.0]]), np.array([[1.0], [2.0]]), np.array([[0.3]])
    family = triangular_exp(a, p, b)

    approx = offdiagonal_quadrature(a, p, b, 1.0, panels=2000)
    assert relative_deviation(approx, family.offdiagonal(1.0)) <= 1e-5


def test_block_powers_match_explicit_products(triangular_pair):
    f1, f2 = triangular_pair

    m1, m2 = f1.as_family()(0.1), f2.as_family()(0.1)
    closed = sequential_block_power(f1, f2, 0.1, 8).to_dense()
    assert relative_deviation(closed, np.linalg.matrix_power(m2 @ m1, 8)) <= 1e-10

    m1, m2 = f1.as_family()(0.05), f2.as_family()(0.05)
    closed = weighted_block_power(f1, f2, 0.05, 6).to_dense()
    assert relative_deviation(closed, np.linalg.matrix_power(m1 @ m2 + m2 @ m1, 6)) <= 1e-10


@pytest.mark.parametrize("h", [0.01, 0.1])
def test_block_powers_up_to_64(triangular_pair, h):
    f1, f2 = triangular_pair
    report = check_block_powers(f1, f2, [(h, k) for k in range(1, 65)])

    assert report.name == "block-powers"
    assert report.passed, report.max_deviation


@pytest.mark.parametrize("seed", range(10))
def test_block_identities_on_seeded_pairs(seed):
    f1 = _random_triangular(seed, label="block1")
    f2 = _random_triangular(seed + 100, label="block2")
    samples = [(h, k) for h in (0.01, 0.1) for k in (1, 2, 5, 16, 64)]

    assert check_block_powers(f1, f2, samples).passed
    for family in (f1, f2):
        assert check_cocycle(family, [(0.3, 0.7), (1.0, 0.5), (0.0, 2.0)]).passed


@pytest.mark.parametrize(("seed", "scale", "time"), [(0, 5.0, 2.0), (1, 20.0, 0.5), (2, 10.0, 5.0)])
def test_large_exponentials_stay_triangular(seed, scale, time):
    a, p, b = _random_blocks(seed, scale)
    family = triangular_exp(a, p, b)
    full = expm(BlockOperator.upper(a, p, b).to_dense(), time)

    value = family(time)
    assert value.lower_left_max == 0.0
    npt.assert_array_equal(value.a11, full[:3, :3])
    npt.assert_array_equal(value.a12, full[:3, 3:])
    npt.assert_array_equal(value.a22, full[3:, 3:])

    for s in np.linspace(0, 5, 11):
        assert family(float(s)).lower_left_max <= 1e-12


def test_block_powers_of_scaled_pairs():
    f1 = _random_triangular(3, scale=5.0)
    f2 = _random_triangular(4, scale=5.0)

    assert check_block_powers(f1, f2, [(0.01, k) for k in range(1, 17)]).passed


def test_block_powers_k1_is_one_product(triangular_pair):
    f1, f2 = triangular_pair
    block = sequential_block_power(f1, f2, 0.3, 1)

    npt.assert_allclose(block.to_dense(), f2.as_family()(0.3) @ f1.as_family()(0.3), atol=1e-14)


def test_block_powers_reject_bad_arguments(triangular_pair):
    f1, f2 = triangular_pair

    with pytest.raises(InputError):
        sequential_block_power(f1, f2, 0.1, 0)
    with pytest.raises(InputError):
        weighted_block_power(f1, f2, -0.1, 2)
    with pytest.raises(DimensionError):
        sequential_block_power(f1, triangular_exp([[0.0]], [[1.0]], [[0.0]]), 0.1, 2)


def test_factorization_identity(rng):
    a = rng.standard_normal((3, 3))
    p = rng.standard_normal((3, 2))
    b = rng.standard_normal((2, 2))
    lam = float(np.abs(np.linalg.eigvals(a)).max() + 1.0)

    report = check_factorization(a, p, b, lam)
    assert report.name == "factorization"
    assert report.passed


def test_exponential_of_triangular_generator_factorizes():
    a, p, b = np.array([[-1.0]]), np.array([[2.0]]), np.array([[-3.0]])
    full = expm(BlockOperator.upper(a, p, b).to_dense(), 1.0)

    npt.assert_allclose(triangular_exp(a, p, b)(1.0).to_dense(), full, rtol=1e-14, atol=1e-15)
