# SPDX-License-Identifier: MIT

from __future__ import annotations

import dataclasses
import typing as t

__all__ = ("IdentityReport",)


@dataclasses.dataclass(frozen=True)
class IdentityReport:
    """Per-sample relative deviations of an algebraic identity."""

    name: str
    samples: tuple[tuple[float, ...], ...]
    deviations: tuple[float, ...]
    tolerance: float

    def __post_init__(self):
        if len(self.samples) != len(self.deviations):
            raise ValueError("every sample needs exactly one deviation.")

    @property
    def max_deviation(self) -> float:
        return max(self.deviations, default=0.0)

    @property
    def passed(self) -> bool:
        return all(d <= self.tolerance for d in self.deviations)

    def to_json(self) -> dict[str, t.Any]:
        return {
            "name": self.name,
            "tolerance": self.tolerance,
            "samples": [list(s) for s in self.samples],
            "deviations": list(self.deviations),
            "max_deviation": self.max_deviation,
            "passed": self.passed,
        }
