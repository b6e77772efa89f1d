# SPDX-License-Identifier: MIT

import typing as t

__all__ = ("CLIException", "ConfigError")


class CLIException(Exception):
    pass


class ConfigError(CLIException):
    def __init__(
        self, message: str, *, source: t.Optional[str] = None, key: t.Optional[str] = None
    ):
        self.source = source
        self.key = key

        fmt = message
        if key is not None:
            fmt = f"{key}: {fmt}"
        if source is not None:
            fmt = f"{source}: {fmt}"

        super().__init__(fmt)
