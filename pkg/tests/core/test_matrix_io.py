# SPDX-License-Identifier: MIT

import numpy.testing as npt
import pytest

from opsplit.core.errors import DimensionError, InputError
from opsplit.core.matrix_io import format_matrix, parse_matrix, read_matrix, write_matrix


def test_format_matrix_layout():
    assert format_matrix([[1.0, -0.5], [0.1, 3.0]]) == "2 2\n1 -0.5\n0.10000000000000001 3\n"


def test_written_matrices_read_back_exactly(tmp_path, rng):
    a = rng.standard_normal((3, 4))
    path = tmp_path / "a.txt"

    write_matrix(path, a)
    npt.assert_array_equal(read_matrix(path), a)


def test_parse_matrix_ignores_blank_lines():
    npt.assert_array_equal(parse_matrix("\n1 2\n\n4 5\n"), [[4.0, 5.0]])


@pytest.mark.parametrize(
    ("text", "error", "message"),
    [
        ("", InputError, "empty"),
        ("two 2\n1 2\n", InputError, "rows cols"),
        ("2 2\n1 2\n", DimensionError, "2 rows"),
        ("1 2\n1 2 3\n", DimensionError, "expected 2 entries"),
        ("1 2\n1 x\n", InputError, "could not parse"),
        ("1 1\nnan\n", InputError, "non-finite"),
    ],
)
def test_parse_matrix_errors(text, error, message):
    with pytest.raises(error, match=message):
        parse_matrix(text, source="m.txt")


def test_missing_matrix_file_names_the_path(tmp_path):
    path = tmp_path / "missing.txt"

    with pytest.raises(InputError, match="missing.txt"):
        read_matrix(path)
