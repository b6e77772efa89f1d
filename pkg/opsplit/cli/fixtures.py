# SPDX-License-Identifier: MIT
"""Built-in and file-backed fixtures.

Random fixtures draw from ``numpy.random.Generator(PCG64(seed))`` so a seed
pins every matrix across runs and platforms.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from ..applications.feedback import BoundarySystem
from ..applications.grid import GridFunction, read_grid_function
from ..applications.inhom import AugmentedFamily, InhomProblem
from ..core.block import BlockOperator, TriangularFamily, check_condition_i, triangular_exp
from ..core.errors import StructuralError
from ..core.linop import DenseOperator, operator_norm
from ..core.matrix_io import read_matrix
from .config import ExperimentConfig
from .errors import ConfigError

__all__ = (
    "make_rng",
    "random_generator_pair",
    "random_commuting_pair",
    "random_triangular",
    "random_boundary_system",
    "generator_pair",
    "triangular_pair",
    "coupling_block",
    "augmented_pair",
    "inhom_problem",
    "boundary_system",
)

_log = logging.getLogger(__name__)

_GRID_BUILTINS = ("const", "ramp", "sine")


def make_rng(seed: int, *, stream: int = 0) -> np.random.Generator:
    """``stream`` jumps the generator ahead for draws independent of the default stream."""
    bits = np.random.PCG64(seed)
    return np.random.Generator(bits.jumped(stream) if stream else bits)


def _gaussian(rng: np.random.Generator, rows: int, cols: int) -> DenseOperator:
    return rng.standard_normal((rows, cols)) / math.sqrt(max(rows, cols))


def random_generator_pair(
    rng: np.random.Generator, dim: int
) -> tuple[DenseOperator, DenseOperator]:
    return _gaussian(rng, dim, dim), _gaussian(rng, dim, dim)


def random_commuting_pair(
    rng: np.random.Generator, dim: int
) -> tuple[DenseOperator, DenseOperator]:
    return np.diag(rng.standard_normal(dim)), np.diag(rng.standard_normal(dim))


def random_triangular(
    rng: np.random.Generator, dim_e: int = 3, dim_f: int = 2, *, label: str = ""
) -> TriangularFamily:
    return triangular_exp(
        _gaussian(rng, dim_e, dim_e),
        _gaussian(rng, dim_e, dim_f),
        _gaussian(rng, dim_f, dim_f),
        label=label,
    )


def random_boundary_system(
    rng: np.random.Generator, dim_e: int = 4, dim_de: int = 1
) -> BoundarySystem:
    a = _gaussian(rng, dim_e, dim_e)
    # shifted left of the imaginary axis, so A is invertible and dissipative
    a -= (operator_norm(a) + 1) * np.eye(dim_e)

    return BoundarySystem(
        a,
        _gaussian(rng, dim_e, dim_de),
        _gaussian(rng, dim_de, dim_de),
        _gaussian(rng, dim_de, dim_e),
    )


def _matrix(config: ExperimentConfig, key: str) -> DenseOperator:
    try:
        path = config.matrices[key]
    except KeyError:
        raise ConfigError(f"fixture {config.fixture!r} needs a matrix file.", key=key)

    return read_matrix(path)


def generator_pair(config: ExperimentConfig) -> tuple[DenseOperator, DenseOperator]:
    fixture = config.fixture

    if fixture == "nilpotent2":
        return np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0, 0.0], [1.0, 0.0]])
    if fixture == "commuting2":
        return np.diag([-1.0, -2.0]), np.diag([-2.0, -3.0])
    if fixture == "random":
        return random_generator_pair(make_rng(config.seed), config.dim)
    if fixture == "files":
        return _matrix(config, "a1"), _matrix(config, "a2")

    raise ConfigError(
        f"unknown fixture {fixture!r}, expected nilpotent2, commuting2, random or files.",
        key="fixture",
    )


def _block_from_files(config: ExperimentConfig, prefix: str) -> TriangularFamily:
    block = BlockOperator(*(_matrix(config, f"{prefix}.a{ij}") for ij in ("11", "12", "21", "22")))

    if not check_condition_i(block):
        raise StructuralError(
            f"{prefix} generator has a nonzero lower-left block", deviation=block.lower_left_max
        )

    return triangular_exp(block.a11, block.a12, block.a22, label=prefix)


def triangular_pair(config: ExperimentConfig) -> tuple[TriangularFamily, TriangularFamily]:
    fixture = config.fixture

    if fixture == "triangular":
        return (
            triangular_exp([[-1.0]], [[1.0]], [[0.0]], label="block1"),
            triangular_exp([[-1.0]], [[0.0]], [[0.0]], label="block2"),
        )
    if fixture == "diagonal":
        return (
            triangular_exp([[-1.0]], [[0.0]], [[-2.0]], label="block1"),
            triangular_exp([[-2.0]], [[0.0]], [[-1.0]], label="block2"),
        )
    if fixture == "random":
        rng = make_rng(config.seed)
        return random_triangular(rng, label="block1"), random_triangular(rng, label="block2")
    if fixture == "files":
        return _block_from_files(config, "block1"), _block_from_files(config, "block2")

    raise ConfigError(
        f"unknown fixture {fixture!r}, expected triangular, diagonal, random or files.",
        key="fixture",
    )


def coupling_block(config: ExperimentConfig, dim_e: int, dim_f: int) -> DenseOperator:
    fixture = config.fixture

    if fixture in ("triangular", "diagonal"):
        return np.ones((dim_f, dim_e))
    if fixture == "random":
        return _gaussian(make_rng(config.seed, stream=1), dim_f, dim_e)
    if fixture == "files":
        if "c" in config.matrices:
            return _matrix(config, "c")
        _log.info("No coupling matrix given, perturbing by C = 0.")
        return np.zeros((dim_f, dim_e))

    raise ConfigError(
        f"unknown fixture {fixture!r}, expected triangular, diagonal, random or files.",
        key="fixture",
    )


def augmented_pair(config: ExperimentConfig) -> tuple[AugmentedFamily, AugmentedFamily]:
    """Scalar ``u′ = −u + f₁ + f₂`` on a grid reaching the largest sampled time."""
    delta_s = config.delta_s or 1 / 16
    count = max(2, math.ceil(max(config.t_grid) / delta_s - 1e-9) + 1)

    return (
        AugmentedFamily([[-1.0]], count=count, delta_s=delta_s, active=1),
        AugmentedFamily([[0.0]], count=count, delta_s=delta_s, active=2),
    )


def _grid_spacing(config: ExperimentConfig) -> float:
    if config.delta_s is not None:
        return config.delta_s
    # quadrature fine enough that the splitting error dominates
    return config.time / (max(config.ns) * 16) if config.time > 0 else 1 / 16


def _grid_function(spec: str, *, count: int, delta_s: float, dim: int) -> GridFunction:
    if spec.partition(":")[0] in _GRID_BUILTINS:
        return GridFunction.builtin(spec, count, delta_s, dim)
    return read_grid_function(spec)


def inhom_problem(config: ExperimentConfig) -> InhomProblem:
    if config.fixture == "scalar":
        a1, a2 = np.array([[-1.0]]), np.array([[0.0]])
    elif config.fixture == "files":
        a1, a2 = _matrix(config, "a1"), _matrix(config, "a2")
    else:
        raise ConfigError(
            f"unknown fixture {config.fixture!r}, expected scalar or files.", key="fixture"
        )

    dim = a1.shape[0]
    delta_s = _grid_spacing(config)
    count = max(2, math.ceil(config.time / delta_s - 1e-9) + 1)

    f1 = _grid_function(config.f1, count=count, delta_s=delta_s, dim=dim)
    f2 = _grid_function(config.f2, count=f1.count, delta_s=f1.delta_s, dim=dim)

    u0 = np.asarray(config.u0, dtype=np.float64)
    if u0.shape[0] == 1:
        u0 = np.full(dim, u0[0])

    _log.debug("Inhomogeneous fixture on %d nodes with spacing %g.", f1.count, f1.delta_s)
    return InhomProblem(a1, a2, f1, f2, u0)


def boundary_system(config: ExperimentConfig) -> BoundarySystem:
    name, _, arg = config.fixture.partition(":")

    if name == "laplace1d":
        try:
            return BoundarySystem.laplace1d(int(arg) if arg else 32)
        except ValueError:
            raise ConfigError(f"expected laplace1d:n, got {config.fixture!r}.", key="fixture")
    if name == "scalar":
        return BoundarySystem.scalar()
    if name == "random":
        return random_boundary_system(make_rng(config.seed), config.dim)
    if name == "files":
        return BoundarySystem(*(_matrix(config, key) for key in ("a", "gamma", "b", "c")))

    raise ConfigError(
        f"unknown fixture {config.fixture!r}, expected laplace1d:n, scalar, random or files.",
        key="fixture",
    )
