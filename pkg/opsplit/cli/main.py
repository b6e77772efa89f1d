# SPDX-License-Identifier: MIT
"""``opsplit`` command line entry point."""

from __future__ import annotations

import argparse
import logging
import sys
import typing as t

from ..__about__ import version_string
from ..applications.errors import ApplicationException
from ..core.errors import LinalgException
from ..splitting.errors import SplittingException
from .commands import EXIT_INPUT_ERROR, run
from .config import COMMANDS, ExperimentConfig, read_config_file
from .errors import CLIException, ConfigError

__all__ = ("build_parser", "main")

_log = logging.getLogger(__name__)

# (flag, config key, help)
_OPTIONS: tuple[tuple[str, str, str], ...] = (
    ("--fixture", "fixture", "built-in fixture name, or 'files' to read matrices given via --set"),
    ("--scheme", "scheme", "comma list of sequential, strang, weighted, or 'all'"),
    ("--t", "t", "final time"),
    ("--t-grid", "t_grid", "stability times, e.g. 0.1,0.5,1 or 0.1:5:log:8"),
    ("--n-grid", "n_grid", "stability step counts, e.g. 1:256:dyadic"),
    ("--ns", "ns", "convergence step counts, e.g. 4:256:dyadic"),
    ("--norm", "norm", "spectral or l1"),
    ("--output", "output", "report path; standard output when omitted"),
    ("--seed", "seed", "seed for random fixtures"),
    ("--dim", "dim", "dimension of random fixtures"),
    ("--f1", "f1", "first inhomogeneity: const:c, ramp, sine:freq or a grid file"),
    ("--f2", "f2", "second inhomogeneity, same forms as --f1"),
    ("--u0", "u0", "initial state, a comma list or a single broadcast value"),
    ("--delta-s", "delta_s", "spacing of the inhomogeneity grid"),
    ("--fine-factor", "fine_factor", "refinement of the reference quadrature"),
    ("--nesting", "nesting", "coupling-outer or coupling-inner"),
    ("--lambdas", "lambdas", "Dirichlet decay grid, e.g. 10:1e4:log:13"),
    ("--threads", "threads", "worker threads, 0 for automatic"),
)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="file of 'key = value' lines, overridden by flags")
    for flag, key, help_ in _OPTIONS:
        common.add_argument(flag, dest=key, help=help_)
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="any config key, including matrix files such as a1=path or block1.a12=path",
    )
    common.add_argument(
        "--log-level",
        default="WARNING",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        help="logging threshold on standard error",
    )

    parser = argparse.ArgumentParser(
        prog="opsplit", description="Operator splitting experiments on finite-dimensional models."
    )
    parser.add_argument("--version", action="version", version=version_string())

    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common], help=f"run the {command} experiment")

    return parser


def _collect(args: argparse.Namespace) -> dict[str, str]:
    values: dict[str, str] = {}

    if args.config is not None:
        values.update(read_config_file(args.config))

    for _, key, _ in _OPTIONS:
        value = getattr(args, key)
        if value is not None:
            values[key] = value

    for item in args.overrides:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"expected KEY=VALUE, got {item!r}.", source="--set")
        values[key.strip().replace("-", "_")] = value.strip()

    return values


def main(argv: t.Optional[t.Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        config = ExperimentConfig.from_mapping(args.command, _collect(args))
        _log.debug("Resolved configuration: %s", config.echo())
        return run(config)
    except (
        CLIException,
        LinalgException,
        SplittingException,
        ApplicationException,
    ) as e:
        print(f"opsplit: error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except OSError as e:
        name = f" {e.filename}" if e.filename else ""
        print(f"opsplit: error:{name}: {e.strerror or e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
