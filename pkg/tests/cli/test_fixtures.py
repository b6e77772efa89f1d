# SPDX-License-Identifier: MIT

import numpy as np
import numpy.testing as npt
import pytest

from opsplit.applications.grid import GridFunction, write_grid_function
from opsplit.cli import fixtures
from opsplit.cli.config import ExperimentConfig
from opsplit.cli.errors import ConfigError
from opsplit.core.errors import InputError, StructuralError
from opsplit.core.matrix_io import write_matrix


def _config(command: str, **values: str) -> ExperimentConfig:
    return ExperimentConfig.from_mapping(command, values)


def test_nilpotent_pair():
    a1, a2 = fixtures.generator_pair(_config("convergence"))

    npt.assert_array_equal(a1 @ a1, np.zeros((2, 2)))
    npt.assert_array_equal(a2 @ a2, np.zeros((2, 2)))
    assert np.abs(a1 @ a2 - a2 @ a1).max() > 0


def test_random_fixtures_are_pinned_by_seed():
    first = fixtures.generator_pair(_config("convergence", fixture="random", seed="7", dim="3"))
    again = fixtures.generator_pair(_config("convergence", fixture="random", seed="7", dim="3"))
    other = fixtures.generator_pair(_config("convergence", fixture="random", seed="8", dim="3"))

    assert first[0].shape == (3, 3)
    npt.assert_array_equal(first[0], again[0])
    npt.assert_array_equal(first[1], again[1])
    assert not np.array_equal(first[0], other[0])


def test_commuting_pair_commutes():
    a1, a2 = fixtures.random_commuting_pair(fixtures.make_rng(0), 4)
    npt.assert_allclose(a1 @ a2, a2 @ a1)


def test_generator_pair_from_files(tmp_path, rng):
    a1, a2 = rng.standard_normal((2, 3, 3))
    write_matrix(tmp_path / "a1.txt", a1)
    write_matrix(tmp_path / "a2.txt", a2)

    config = _config(
        "convergence", fixture="files", a1=str(tmp_path / "a1.txt"), a2=str(tmp_path / "a2.txt")
    )
    read1, read2 = fixtures.generator_pair(config)

    npt.assert_array_equal(read1, a1)
    npt.assert_array_equal(read2, a2)


def test_missing_matrix_key():
    with pytest.raises(ConfigError, match="a2"):
        fixtures.generator_pair(_config("convergence", fixture="files", a1="a1.txt"))


def test_missing_matrix_file(tmp_path):
    missing = str(tmp_path / "nowhere.txt")
    config = _config("convergence", fixture="files", a1=missing, a2=missing)

    with pytest.raises(InputError, match="nowhere.txt"):
        fixtures.generator_pair(config)


def test_unknown_fixture():
    with pytest.raises(ConfigError, match="unknown fixture"):
        fixtures.generator_pair(_config("convergence", fixture="heat"))


def test_triangular_fixture():
    f1, f2 = fixtures.triangular_pair(_config("stability"))

    assert (f1.label, f2.label) == ("block1", "block2")
    npt.assert_allclose(f1.offdiagonal(1.0), [[1 - np.exp(-1.0)]], rtol=1e-12)
    npt.assert_allclose(f2.offdiagonal(1.0), [[0.0]], atol=1e-15)


def _write_blocks(tmp_path, rng, *, lower_left: float = 0.0) -> dict[str, str]:
    values = {"fixture": "files"}
    for prefix in ("block1", "block2"):
        blocks = {
            "11": rng.standard_normal((2, 2)),
            "12": rng.standard_normal((2, 1)),
            "21": np.full((1, 2), lower_left),
            "22": rng.standard_normal((1, 1)),
        }
        for ij, block in blocks.items():
            path = tmp_path / f"{prefix}.a{ij}.txt"
            write_matrix(path, block)
            values[f"{prefix}.a{ij}"] = str(path)
    return values


def test_triangular_pair_from_files(tmp_path, rng):
    f1, f2 = fixtures.triangular_pair(_config("stability", **_write_blocks(tmp_path, rng)))

    assert (f1.dim_e, f1.dim_f) == (2, 1)
    assert f2.label == "block2"


def test_triangular_files_need_a_zero_lower_left_block(tmp_path, rng):
    config = _config("stability", **_write_blocks(tmp_path, rng, lower_left=0.5))

    with pytest.raises(StructuralError, match="lower-left"):
        fixtures.triangular_pair(config)


def test_inhom_fixture_spacing():
    problem = fixtures.inhom_problem(_config("inhom", t="1", ns="4:16:dyadic"))

    assert problem.f1.delta_s == pytest.approx(1 / 256)
    assert problem.f1.count == 257
    npt.assert_array_equal(problem.u0, [1.0])


def test_inhom_fixture_reads_grid_files(tmp_path):
    path = tmp_path / "f2.txt"
    write_grid_function(path, GridFunction.builtin("ramp", 17, 1 / 16, 1))

    problem = fixtures.inhom_problem(
        _config("inhom", t="1", f2=str(path), delta_s=str(1 / 16), u0="3")
    )

    npt.assert_allclose(problem.f2.values[:, 0], np.linspace(0, 1, 17))
    npt.assert_array_equal(problem.u0, [3.0])


@pytest.mark.parametrize(
    ("fixture", "dim"),
    [("laplace1d:8", 9), ("laplace1d", 33), ("scalar", 2), ("random", 5)],
)
def test_boundary_fixtures(fixture, dim):
    assert fixtures.boundary_system(_config("feedback", fixture=fixture)).dim == dim


def test_random_boundary_system_is_dissipative():
    system = fixtures.random_boundary_system(fixtures.make_rng(3))
    assert np.linalg.eigvals(system.A).real.max() < 0


def test_bad_laplace_fixture():
    with pytest.raises(ConfigError, match="laplace1d:n"):
        fixtures.boundary_system(_config("feedback", fixture="laplace1d:many"))


def test_jumped_stream_is_independent_and_pinned():
    default = fixtures.make_rng(5).standard_normal(4)
    jumped = fixtures.make_rng(5, stream=1).standard_normal(4)

    npt.assert_array_equal(jumped, fixtures.make_rng(5, stream=1).standard_normal(4))
    assert not np.array_equal(default, jumped)


def test_coupling_block_shapes(tmp_path):
    assert fixtures.coupling_block(_config("stability"), 1, 1).tolist() == [[1.0]]

    drawn = fixtures.coupling_block(_config("stability", fixture="random", seed="3"), 3, 2)
    assert drawn.shape == (2, 3)

    write_matrix(tmp_path / "c.txt", np.full((2, 3), 0.5))
    config = _config("stability", fixture="files", c=str(tmp_path / "c.txt"))
    read = fixtures.coupling_block(config, 3, 2)
    npt.assert_array_equal(read, np.full((2, 3), 0.5))
    npt.assert_array_equal(
        fixtures.coupling_block(_config("stability", fixture="files"), 3, 2), np.zeros((2, 3))
    )


def test_augmented_pair_reaches_the_largest_time():
    f1, f2 = fixtures.augmented_pair(_config("stability", t_grid="0.5,2"))

    assert (f1.active, f2.active) == (1, 2)
    assert f1.delta_s == 1 / 16
    assert f1.count == 33
    assert f1.compatible(f2)
