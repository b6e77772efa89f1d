# SPDX-License-Identifier: MIT

__name__ = "opsplit"
__description__ = "Operator splitting product formulas on block operator matrices."

import re
import typing as t

from ._version import __version__

# scm versions look like 0.1.0, 0.2.0rc1 or 0.1.1.dev3+g1234abc
_VERSION_RE = re.compile(
    r"^(?P<major>\d+)\.(?P<minor>\d+)(?:\.(?P<patch>\d+))?"
    r"(?:(?P<pre>a|b|rc)(?P<serial>\d+))?"
    r"(?:\.dev(?P<dev>\d+))?"
    r"(?:\+(?P<local>[\w.]+))?$"
)


class VersionInfo(t.NamedTuple):
    major: int
    minor: int
    patch: int
    releaseinfo: t.Literal["alpha", "beta", "candidate", "dev", "stable"] = "stable"
    serial: t.Optional[int] = None

    @classmethod
    def from_string(cls, raw: str, /):
        match = _VERSION_RE.match(raw)
        if match is None:
            raise ValueError(f"{raw!r} is not a version string this package understands.")

        releaseinfo = "stable"
        serial = None

        if match["pre"]:
            releaseinfo = {"a": "alpha", "b": "beta", "rc": "candidate"}[match["pre"]]
            serial = int(match["serial"])
        elif match["dev"]:
            releaseinfo = "dev"
            serial = int(match["dev"])

        return cls(
            major=int(match["major"]),
            minor=int(match["minor"]),
            patch=int(match["patch"] or 0),
            releaseinfo=releaseinfo,
            serial=serial,
        )


version_info: VersionInfo = VersionInfo.from_string(__version__)


def version_string() -> str:
    return f"{__name__} {__version__}"


del t
