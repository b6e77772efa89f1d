# SPDX-License-Identifier: MIT

import numpy as np
import pytest
from hypothesis import settings

from opsplit.applications.grid import GridFunction
from opsplit.applications.inhom import InhomProblem
from opsplit.core.block import triangular_exp

settings.register_profile("opsplit", max_examples=25, deadline=None)
settings.load_profile("opsplit")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(1234))


@pytest.fixture
def triangular_pair(rng):
    def draw(dim_e: int, dim_f: int):
        scale = 1 / np.sqrt(max(dim_e, dim_f))
        return (
            rng.standard_normal((dim_e, dim_e)) * scale,
            rng.standard_normal((dim_e, dim_f)) * scale,
            rng.standard_normal((dim_f, dim_f)) * scale,
        )

    return (
        triangular_exp(*draw(3, 2), label="block1"),
        triangular_exp(*draw(3, 2), label="block2"),
    )


@pytest.fixture
def scalar_inhom() -> InhomProblem:
    """``u′ = −u + 1``, split as ``A₁ = −1, f₁ = 0`` and ``A₂ = 0, f₂ = 1``."""
    delta_s = 1 / 4096
    count = 4097

    return InhomProblem(
        [[-1.0]],
        [[0.0]],
        GridFunction.zeros(count, delta_s, 1),
        GridFunction.builtin("const:1", count, delta_s, 1),
        np.array([2.0]),
    )
