import math

from qhalab.report import ErrorTable, Record, Report


def test_record():
    """Ensure records pass on small errors and fail on NaN."""
    assert Record('core.x', 'x = x', 1e-12, 1e-10).passed
    assert not Record('core.x', 'x = x', 1e-8, 1e-10).passed
    nan = Record('core.x', 'x = x', math.nan, 1e-10)
    assert not nan.passed
    assert nan.to_dict()['error'] is None


def test_error_table():
    """Ensure tables summarise errors per parameter value."""
    table = ErrorTable('sot_phi', 't')
    for t, errors in ((1.0, (0.4, 0.3)), (0.5, (0.5, 0.0)),
                      (0.25, (0.1, 0.0))):
        for j, error in enumerate(errors):
            table.add(t, j, error)

    assert table.parameters == [1.0, 0.5, 0.25]
    assert table.errors(0.5) == [0.5, 0.0]
    assert table.first == 0.4
    assert table.final == 0.1
    assert table.improves()
    assert not table.is_monotone()
    assert table.to_dict()['rows'][0] == [1.0, 0, 0.4]

    assert ErrorTable('empty').final == 0.0
    assert ErrorTable('empty').improves()


def test_error_table_floor():
    """Ensure errors at the noise floor count as converged."""
    table = ErrorTable('sot_e01', 't')
    for t, errors in ((1.0, (3e-17, 0.9)), (0.5, (2e-17, 0.4)),
                      (0.25, (4e-17, 2e-4))):
        for j, error in enumerate(errors):
            table.add(t, j, error)

    # Index 0 sits at rounding level and does not strictly shrink.
    assert not table.improves()
    assert table.improves(floor=1e-12)

    flat = ErrorTable('truncation_phi_phi', 'N')
    for N, error in ((8, 2e-15), (12, 3e-15), (16, 1e-15)):
        flat.add(N, 0, error)
    assert not flat.is_monotone()
    assert flat.is_monotone(floor=1e-12)
    flat.add(20, 0, 1e-3)
    assert not flat.is_monotone(floor=1e-12)


def test_report():
    """Ensure a report passes only when every record passes."""
    report = Report('conv')
    assert report.passed

    report.record('conv.a', 'a', 0.0, 1e-10)
    assert report.passed
    report.record('conv.b', 'b', 1.0, 1e-10, ['TruncationWarning: leak'])
    assert not report.passed
    assert [r.identity for r in report.failures] == ['conv.b']

    report.timing['conv.a'] = 1.5
    assert 'timing' in report.to_dict()
    assert 'timing' not in report.to_dict(timing=False)
    assert report.to_dict()['records'][1]['diagnostics'] == [
        'TruncationWarning: leak'
    ]
