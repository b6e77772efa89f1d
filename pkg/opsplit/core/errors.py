# SPDX-License-Identifier: MIT

import typing as t

__all__ = (
    "LinalgException",
    "DimensionError",
    "InputError",
    "NumericalError",
    "StructuralError",
    "SpectrumError",
)


class LinalgException(Exception):
    pass


class DimensionError(LinalgException):
    pass


class InputError(LinalgException):
    pass


class NumericalError(LinalgException):
    def __init__(self, message: str, *, last_iterate: t.Optional[t.Any] = None):
        self.last_iterate = last_iterate
        super().__init__(message)


class StructuralError(LinalgException):
    def __init__(self, message: str, *, deviation: t.Optional[float] = None):
        self.deviation = deviation

        fmt = message
        if deviation is not None:
            fmt += f" (deviation {deviation:.3e})"

        super().__init__(fmt)


class SpectrumError(LinalgException):
    def __init__(
        self,
        lam: float,
        *,
        condition: t.Optional[float] = None,
        detail: t.Optional[str] = None,
    ):
        self.lam = lam
        self.condition = condition

        fmt = f"{lam!r} lies (numerically) in the spectrum"
        if condition is not None:
            fmt += f" (condition estimate {condition:.3e})"
        if detail:
            fmt += f"\n{detail}"

        super().__init__(fmt)
