try:
    import click
except ImportError:
    raise RuntimeError(
        'To use the qhalab CLI you need to install the optional'
        ' dependencies.\n'
        ' If you are using pip, do `pip install "qhalab[cli]"`.'
    )

import logging
from pathlib import Path

from qhalab.backends import available_backends
from qhalab.config import load_config
from qhalab.errors import ConfigError
from qhalab.render import available_renderers
from qhalab.render.csv import CSVRenderer
from qhalab.render.json import JSONRenderer
from qhalab.suites import STUDIES, SUITES, run_convergence, run_suite
from qhalab.symbols import registry

log = logging.getLogger(__name__)


def _load(config, **overrides):
    try:
        return load_config(config).with_overrides(**overrides)
    except ConfigError as e:
        raise click.UsageError(str(e))


def _emit(ctx, report, out_dir):
    """Write report.json and one CSV per error table to `out_dir`, echo the
    selected rendering and exit with the pass/fail status."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / 'report.json').write_text(JSONRenderer().render(report))
    tables = CSVRenderer()
    for table in report.tables:
        (out / f'{table.name}.csv').write_text(tables.render_table(table))
    log.info('Wrote report and %d tables to %s', len(report.tables), out)

    renderer = ctx.obj['renderer']()
    click.echo(renderer.render(report))
    ctx.exit(0 if report.passed else 1)


def _describe(symbol):
    radial = ', radial' if symbol.is_radial else ''
    bound = ''
    if symbol.sup_bound is not None:
        bound = f', sup <= {symbol.sup_bound:g}'
    return f'{symbol.kind}{radial}{bound}'


@click.group()
@click.option(
    '--renderer',
    type=click.Choice(list(available_renderers().keys())),
    help='Specify the renderer used to print the report.',
    default='txt'
)
@click.option(
    '-v',
    '--verbose',
    count=True,
    help='Log progress to stderr; repeat for debug output.'
)
@click.pass_context
def cli(ctx, renderer, verbose):
    """Numerical checks of quantum harmonic analysis on truncated Fock and
    Bergman spaces."""
    if verbose:
        logging.basicConfig(
            level=logging.DEBUG if verbose > 1 else logging.INFO,
            format='%(asctime)s %(name)s %(levelname)s %(message)s'
        )
    ctx.ensure_object(dict)
    ctx.obj['renderer'] = available_renderers()[renderer]


@cli.command('suite')
@click.argument('name', type=click.Choice(list(SUITES) + ['all']))
@click.option(
    '--config',
    type=click.Path(exists=True, dir_okay=False),
    help='INI file with the run configuration. [default: built-in defaults]'
)
@click.option(
    '--out',
    type=click.Path(file_okay=False),
    help='Directory receiving report.json and the CSV tables.'
)
@click.option('--seed', type=int, help='Override the run seed.')
@click.option(
    '--tol-scale',
    type=float,
    help='Multiply every tolerance by this factor.'
)
@click.pass_context
def suite_command(ctx, name, config, out, seed, tol_scale):
    """Run the checks of suite `name`.

    Exits with 0 when every check passes and 1 otherwise.
    """
    run_config = _load(config, seed=seed, tol_scale=tol_scale, out_dir=out)
    report = run_suite(run_config, name)
    _emit(ctx, report, run_config.run.out_dir)


@cli.command('converge')
@click.argument('study', type=click.Choice(list(STUDIES)))
@click.option(
    '--config',
    type=click.Path(exists=True, dir_okay=False),
    help='INI file with the run configuration. [default: built-in defaults]'
)
@click.option(
    '--out',
    type=click.Path(file_okay=False),
    help='Directory receiving report.json and the CSV tables.'
)
@click.option('--seed', type=int, help='Override the run seed.')
@click.option(
    '--tol-scale',
    type=float,
    help='Multiply every tolerance by this factor.'
)
@click.pass_context
def converge_command(ctx, study, config, out, seed, tol_scale):
    """Tabulate errors of convergence study `study` as CSV.

    Exits with 0 when every recorded check passes and 1 otherwise.
    """
    run_config = _load(config, seed=seed, tol_scale=tol_scale, out_dir=out)
    report = run_convergence(run_config, study)
    _emit(ctx, report, run_config.run.out_dir)


@cli.command('registry')
def registry_command():
    """List the available symbols, space backends and renderers."""
    for title, items in (
            ('symbols', {k: _describe(v(1)) for k, v in registry().items()}),
            ('backends', {k: v.DESCRIPTION
                          for k, v in available_backends().items()}),
            ('renderers', {k: v.DESCRIPTION
                           for k, v in available_renderers().items()})):
        click.echo(f'{title}:')
        for name, description in items.items():
            summary = (description or '').strip().split('\n')[0]
            click.echo(f'  {name:<20} {summary}'.rstrip())


if __name__ == '__main__':
    cli()
