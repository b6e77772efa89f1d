# SPDX-License-Identifier: MIT

import pytest

from opsplit.core.reports import IdentityReport


def test_identity_report_summary():
    report = IdentityReport("law", ((0.1, 0.2), (1.0, 1.0)), (1e-13, 5e-10), 1e-9)

    assert report.max_deviation == 5e-10
    assert report.passed
    assert report.to_json() == {
        "name": "law",
        "tolerance": 1e-9,
        "samples": [[0.1, 0.2], [1.0, 1.0]],
        "deviations": [1e-13, 5e-10],
        "max_deviation": 5e-10,
        "passed": True,
    }


def test_identity_report_fails_above_tolerance():
    assert not IdentityReport("law", ((1.0,),), (2e-9,), 1e-9).passed


def test_empty_identity_report_passes():
    report = IdentityReport("law", (), (), 1e-9)

    assert report.max_deviation == 0.0
    assert report.passed


def test_identity_report_needs_matching_lengths():
    with pytest.raises(ValueError):
        IdentityReport("law", ((1.0,),), (), 1e-9)
