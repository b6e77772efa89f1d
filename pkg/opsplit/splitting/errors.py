# SPDX-License-Identifier: MIT

__all__ = (
    "SplittingException",
    "SchemeError",
    "DegenerateFitError",
)


class SplittingException(Exception):
    pass


class SchemeError(SplittingException):
    pass


class DegenerateFitError(SplittingException):
    def __init__(self, usable: int, required: int, *, floor: float):
        self.usable = usable
        self.required = required

        super().__init__(
            f"only {usable} error(s) above the rounding floor {floor:g}, "
            f"an order fit needs at least {required}."
        )
