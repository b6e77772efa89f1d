# SPDX-License-Identifier: MIT

import typing as t

__all__ = (
    "ApplicationException",
    "DomainError",
    "DiscretizationError",
)


class ApplicationException(Exception):
    pass


class DomainError(ApplicationException):
    def __init__(self, time: float, limit: float, *, what: t.Optional[str] = None):
        self.time = time
        self.limit = limit

        fmt = f"time {time!r} exceeds the horizon {limit!r}"
        if what:
            fmt += f" of {what}"

        super().__init__(fmt)


class DiscretizationError(ApplicationException):
    pass
