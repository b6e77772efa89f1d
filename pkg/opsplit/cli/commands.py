# SPDX-License-Identifier: MIT
"""Experiment runners behind the ``opsplit`` subcommands.

Each runner writes its report and returns whether every enabled check passed.
"""

from __future__ import annotations

import io
import itertools
import logging
import sys
import typing as t

import numpy as np

from ..__about__ import version_string
from ..applications.feedback import (
    check_dirichlet_factorization,
    check_dirichlet_residual,
    check_t1_closed_form,
    ds_decay_check,
    feedback_split_study,
    offdiagonal_r1,
)
from ..applications.inhom import (
    AugmentedFamily,
    inhom_convergence_study,
    sample_augmented_norms,
    verify_lp_sum_identities,
)
from ..core.block import TriangularFamily, check_block_powers, check_cocycle
from ..core.linop import (
    EvolutionFamily,
    check_nilpotent_exponential,
    check_semigroup_law,
    expm,
)
from ..core.reports import IdentityReport
from ..internal.json import dump_json
from ..splitting.schemes import ConvergenceReport, convergence_study
from ..splitting.stability import (
    TriangularStabilityReport,
    check_bounded_perturbation_stability,
    check_rescaling,
    check_triangular_stability,
    estimate_favard,
    fit_growth_bound,
)
from . import fixtures
from .config import Command, ExperimentConfig

__all__ = ("EXIT_OK", "EXIT_INPUT_ERROR", "EXIT_CHECK_FAILED", "run")

_log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_CHECK_FAILED = 2


def _write(config: ExperimentConfig, text: str):
    if config.output is None:
        sys.stdout.write(text)
        return

    with open(config.output, "w", encoding="utf-8", newline="") as fp:
        fp.write(text)
    _log.info("Wrote %s.", config.output)


def _envelope(config: ExperimentConfig) -> dict[str, t.Any]:
    return {"version": version_string(), "config": config.echo()}


def _emit_json(config: ExperimentConfig, payload: t.Mapping[str, t.Any]):
    _write(config, dump_json({**_envelope(config), **payload}) + "\n")


def _emit_csv(config: ExperimentConfig, reports: t.Sequence[ConvergenceReport]):
    buffer = io.StringIO()
    for i, report in enumerate(reports):
        report.write_csv(buffer, header=i == 0)

    _write(config, buffer.getvalue())

    # the CSV schema is fixed, so the config echo goes to a sidecar
    if config.output is not None:
        with open(f"{config.output}.meta.json", "w", encoding="utf-8") as fp:
            fp.write(dump_json(_envelope(config)) + "\n")


def run_convergence(config: ExperimentConfig) -> bool:
    a1, a2 = fixtures.generator_pair(config)
    f1 = EvolutionFamily.from_generator(a1, label="A1")
    f2 = EvolutionFamily.from_generator(a2, label="A2")
    reference = expm(a1 + a2, config.time)

    reports = [
        convergence_study(
            scheme,
            f1,
            f2,
            reference,
            config.time,
            config.ns,
            norm=config.norm,
            threads=config.threads,
        )
        for scheme in config.schemes
    ]

    _emit_csv(config, reports)
    return True


def _rescaling(
    config: ExperimentConfig,
    report: TriangularStabilityReport,
    f1: TriangularFamily,
    f2: TriangularFamily,
) -> IdentityReport:
    full1, full2 = f1.as_family(), f2.as_family()
    bound = report.product_fit.bound
    points = itertools.product(sorted(set(config.t_grid)), sorted(set(config.n_grid)))

    # h = t/n keeps every rescaled power on the grid the bound was fitted to
    return _merge(
        "rescaling",
        [
            check_rescaling(report.scheme, full1, full2, bound, (s / n,), (n,), norm=config.norm)
            for s, n in points
        ],
    )


def run_stability(config: ExperimentConfig) -> bool:
    f1, f2 = fixtures.triangular_pair(config)

    reports = [
        check_triangular_stability(
            f1,
            f2,
            config.t_grid,
            config.n_grid,
            scheme=scheme,
            norm=config.norm,
            threads=config.threads,
        )
        for scheme in config.schemes
    ]
    favard = {
        family.label: estimate_favard(family.offdiagonal, norm=config.norm).to_json()
        for family in (f1, f2)
    }
    rescaling = [_rescaling(config, r, f1, f2) for r in reports]

    perturbation = check_bounded_perturbation_stability(
        f1.as_family(),
        fixtures.coupling_block(config, f1.dim_e, f1.dim_f),
        config.t_grid,
        config.n_grid,
        norm=config.norm,
        threads=config.threads,
    )

    aug1, aug2 = fixtures.augmented_pair(config)
    grid_norm = "l1" if config.norm == "l1" else "sup"
    augmented = {
        scheme.value: fit_growth_bound(
            sample_augmented_norms(
                scheme,
                aug1,
                aug2,
                config.t_grid,
                config.n_grid,
                norm=grid_norm,
                threads=config.threads,
            )
        )
        for scheme in config.schemes
    }

    satisfied = (
        all(r.satisfied for r in reports)
        and all(r.passed for r in rescaling)
        and perturbation.satisfied
        and all(fit.satisfied for fit in augmented.values())
    )
    _emit_json(
        config,
        {
            "reports": [r.to_json() for r in reports],
            "favard": favard,
            "rescaling": [
                {"scheme": r.scheme.value, **check.to_json()}
                for r, check in zip(reports, rescaling)
            ],
            "bounded_perturbation": perturbation.to_json(),
            "augmented": {
                "norm": grid_norm,
                "delta_s": aug1.delta_s,
                "fits": {name: fit.to_json() for name, fit in augmented.items()},
            },
            "satisfied": satisfied,
        },
    )
    return satisfied


def run_inhom(config: ExperimentConfig) -> bool:
    problem = fixtures.inhom_problem(config)

    reports = [
        inhom_convergence_study(
            problem,
            scheme,
            config.time,
            config.ns,
            fine_factor=config.fine_factor,
            norm=config.norm,
            threads=config.threads,
        )
        for scheme in config.schemes
    ]

    _emit_csv(config, reports)
    return True


def run_feedback(config: ExperimentConfig) -> bool:
    system = fixtures.boundary_system(config)

    checks = [
        check_dirichlet_residual(system, (0.0, 1.0)),
        check_t1_closed_form(system, (0.0, 0.5, 1.0, 2.0), norm=config.norm),
        check_dirichlet_factorization(system, 1.0),
    ]
    decay = ds_decay_check(system, config.lambdas, norm=config.norm, threads=config.threads)
    favard = estimate_favard(lambda s: offdiagonal_r1(system, s), norm=config.norm)

    convergence = [
        feedback_split_study(
            system,
            scheme,
            config.time,
            config.ns,
            nesting=config.nesting,
            norm=config.norm,
            threads=config.threads,
        )
        for scheme in config.schemes
    ]

    passed = all(c.passed for c in checks) and decay.passed
    _emit_json(
        config,
        {
            "checks": [c.to_json() for c in checks],
            "ds_decay": decay.to_json(),
            "favard": favard.to_json(),
            "convergence": [r.to_json() for r in convergence],
            "passed": passed,
        },
    )
    return passed


def _merge(name: str, reports: t.Sequence[IdentityReport]) -> IdentityReport:
    return IdentityReport(
        name,
        tuple(itertools.chain.from_iterable(r.samples for r in reports)),
        tuple(itertools.chain.from_iterable(r.deviations for r in reports)),
        max(r.tolerance for r in reports),
    )


def run_verify(config: ExperimentConfig) -> bool:
    rng = fixtures.make_rng(config.seed)
    pairs = [tuple(float(x) for x in row) for row in rng.uniform(0, 2, (8, 2))]

    a1, _ = fixtures.random_generator_pair(rng, config.dim)
    t1 = fixtures.random_triangular(rng, label="block1")
    t2 = fixtures.random_triangular(rng, label="block2")
    system = fixtures.random_boundary_system(rng)

    coupling = np.zeros((5, 5))
    coupling[3:, :3] = rng.standard_normal((2, 3))

    scalars = rng.standard_normal(2)
    delta_s = 1 / 64
    aug1 = AugmentedFamily([[scalars[0]]], count=64, delta_s=delta_s, active=1)
    aug2 = AugmentedFamily([[scalars[1]]], count=64, delta_s=delta_s, active=2)

    reports = [
        check_semigroup_law(EvolutionFamily.from_generator(a1), pairs, norm=config.norm),
        _merge("cocycle", [check_cocycle(f, pairs, norm=config.norm) for f in (t1, t2)]),
        check_block_powers(t1, t2, [(0.1, k) for k in range(1, 65)], norm=config.norm),
        check_nilpotent_exponential(coupling, (0.1, 1.0, 10.0), norm=config.norm),
        _merge("lp-sums", [verify_lp_sum_identities(aug1, aug2, delta_s, k) for k in range(1, 33)]),
        check_dirichlet_residual(system, (0.0, 1.0, 10.0, 100.0)),
        check_t1_closed_form(system, (0.0, 0.5, 1.0, 2.0), norm=config.norm),
        _merge(
            "factorization", [check_dirichlet_factorization(system, lam) for lam in (1.0, 10.0)]
        ),
    ]

    for report in reports:
        _log.info("%s: max deviation %.3e (%s).", report.name, report.max_deviation, report.passed)

    passed = all(r.passed for r in reports)
    _emit_json(config, {"reports": [r.to_json() for r in reports], "passed": passed})
    return passed


_RUNNERS: dict[Command, t.Callable[[ExperimentConfig], bool]] = {
    "convergence": run_convergence,
    "stability": run_stability,
    "inhom": run_inhom,
    "feedback": run_feedback,
    "verify": run_verify,
}


def run(config: ExperimentConfig) -> int:
    passed = _RUNNERS[config.command](config)

    if not passed:
        _log.error("%s: at least one check failed.", config.command)
        return EXIT_CHECK_FAILED
    return EXIT_OK
