import dataclasses

import pytest

from qhalab.config import RunConfig, ToleranceConfig
from qhalab.errors import InvalidParameterError
from qhalab.report import ErrorTable
from qhalab.suites import (
    CHECKS,
    STUDIES,
    SUITES,
    TRUNCATION_DEGREES,
    run_convergence,
    run_suite
)


@pytest.fixture(scope='module')
def quick_config():
    return RunConfig.from_string('[grid]\nM = 64\n[schedule]\nt = 1, 1/2\n')


def test_registry():
    """Ensure every check belongs to a suite and names a real tolerance."""
    tolerances = {f.name for f in dataclasses.fields(ToleranceConfig)}
    identities = set()
    for c in CHECKS:
        assert c.suite in SUITES
        assert c.anchor
        assert c.identity not in identities
        identities.add(c.identity)
        if isinstance(c.tolerance, str):
            assert c.tolerance in tolerances

    assert {c.suite for c in CHECKS} == set(SUITES)
    assert STUDIES == ('sot', 'approx_identity', 'truncation')


def test_core_suite(quick_config):
    """Ensure the core suite passes and reruns identically."""
    report = run_suite(quick_config, 'core')
    assert report.passed, [
        (r.identity, r.error, r.tolerance) for r in report.failures
    ]
    assert report.records
    assert all(r.identity.startswith('core.') for r in report.records)
    assert report.environment['profile'] == 'bump-v2'

    again = run_suite(quick_config, 'core')
    assert again.to_dict(timing=False) == report.to_dict(timing=False)


def test_unknown_suite(quick_config):
    """Ensure unknown names are refused."""
    with pytest.raises(InvalidParameterError):
        run_suite(quick_config, 'everything')
    with pytest.raises(InvalidParameterError):
        run_convergence(quick_config, 'speed')


def test_truncation_study(quick_config):
    """Ensure truncation errors shrink as N grows and every table carries a
    monotonicity record."""
    report = run_convergence(quick_config, 'truncation')
    assert report.suite == 'converge.truncation'
    assert report.passed, [
        (r.identity, r.diagnostics) for r in report.failures
    ]

    names = [table.name for table in report.tables]
    assert names == [
        'truncation',
        'truncation_toeplitz_as_convolution',
        'truncation_phi_phi',
        'truncation_phi_conv_is_berezin',
        'truncation_gaussian_conv_is_toeplitz'
    ]
    assert [r.identity for r in report.records] == [
        f'converge.{name}.monotone' for name in names
    ]
    for table in report.tables:
        assert table.parameter == 'N'
        assert table.parameters == [float(N) for N in TRUNCATION_DEGREES]

    kernel_table = report.tables[0]
    assert kernel_table.improves()
    assert kernel_table.is_monotone()

    # Five registry symbols and five reference operators.
    assert len(report.tables[1].errors(8.0)) == 5
    assert len(report.tables[3].errors(8.0)) == 5
    assert report.tables[2].final < 1e-6


def test_monotone_record_fails(quick_config, monkeypatch):
    """Ensure a table whose errors grow with N fails its record."""
    from qhalab import suites

    def growing(config):
        table = ErrorTable('truncation_growing', 'N')
        for N in TRUNCATION_DEGREES:
            table.add(N, 0, 1e-3 * N)
        return [(table, 'toeplitz')]

    monkeypatch.setattr(suites, '_identity_tables', growing)
    report = run_convergence(quick_config, 'truncation')
    assert not report.passed
    assert [r.identity for r in report.failures] == [
        'converge.truncation_growing.monotone'
    ]
