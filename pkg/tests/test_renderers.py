import csv
import io
import json

from qhalab.render import available_renderers
from qhalab.render.csv import CSVRenderer
from qhalab.render.json import JSONRenderer
from qhalab.render.txt import TXTRenderer
from qhalab.report import Report


def _report():
    report = Report(suite='core', environment={'seed': 0})
    report.record('core.orthonormality', '<e_j, e_k> = delta_jk', 1e-15,
                  1e-10)
    report.record('core.reproducing', '<f, K_z> = f(z)', float('nan'), 1e-8,
                  ['QuadratureError: box too small'])
    table = report.table('sot_phi')
    table.add(1.0, 0, 0.5)
    table.add(0.5, 0, 0.1)
    report.timing['core.orthonormality'] = 0.25
    return report


def test_renderers():
    """Ensure plugin-registered renderers are present and valid."""
    renderers = available_renderers()

    # Make sure our default renderers are available at least.
    assert {'json', 'csv', 'txt'} <= set(renderers)

    # Ensure required fields are available on every renderer.
    for v in renderers.values():
        assert v.DESCRIPTION is not None
        assert v.OPTIONS_CLASS is not None


def test_json_renderer():
    """Ensure the JSON rendering mirrors Report.to_dict()."""
    report = _report()
    data = json.loads(JSONRenderer().render(report))
    assert data['passed'] is False
    assert data['records'][1]['error'] is None
    assert data['tables'][0]['columns'] == ['t', 'index', 'error']
    assert 'timing' in data

    data = json.loads(JSONRenderer(options={'timing': False}).render(report))
    assert 'timing' not in data


def test_csv_renderer():
    """Ensure records and tables render as CSV."""
    renderer = CSVRenderer()
    rows = list(csv.reader(io.StringIO(renderer.render(_report()))))
    assert rows[0] == ['identity', 'error', 'tolerance', 'passed']
    assert rows[1][0] == 'core.orthonormality'
    assert rows[2][3] == 'False'

    rows = list(csv.reader(io.StringIO(
        renderer.render_table(_report().tables[0])
    )))
    assert rows == [['t', 'index', 'error'], ['1.0', '0', '0.5'],
                    ['0.5', '0', '0.1']]


def test_txt_renderer():
    """Ensure the summary lists failures and table worst errors."""
    text = TXTRenderer().render(_report())
    lines = text.split('\n')
    assert lines[0] == 'core: 1/2 passed'
    assert 'core.reproducing' in lines[1]
    assert 'core.orthonormality' not in text
    assert 'QuadratureError: box too small' in text
    assert 't=0.5  worst 1.000e-01' in text

    verbose = TXTRenderer(options={'verbose': True}).render(_report())
    assert '[ok] core.orthonormality' in verbose
