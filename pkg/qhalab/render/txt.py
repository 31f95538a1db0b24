from dataclasses import dataclass

from qhalab.render import Renderer
from qhalab.report import Report


@dataclass
class Options:
    #: List every record, not just failures.
    verbose: bool = False
    #: Include the diagnostics attached to each listed record.
    diagnostics: bool = True


class TXTRenderer(Renderer):
    """
    Renders a short human readable summary of a report.
    """
    OPTIONS_CLASS = Options
    DESCRIPTION = 'Renders a plain text summary.'

    def render(self, report: Report) -> str:
        failures = report.failures
        lines = [
            f'{report.suite}: {len(report.records) - len(failures)}'
            f'/{len(report.records)} passed'
        ]

        listed = report.records if self.opts.verbose else failures
        for record in listed:
            status = 'ok' if record.passed else 'FAIL'
            lines.append(
                f'  [{status}] {record.identity}: {record.anchor}'
                f' (error {record.error:.3e}, tolerance'
                f' {record.tolerance:.3e})'
            )
            if self.opts.diagnostics:
                lines.extend(f'      {d}' for d in record.diagnostics)

        for table in report.tables:
            lines.append(f'  table {table.name}:')
            for value in table.parameters:
                lines.append(
                    f'      {table.parameter}={value:g}'
                    f'  worst {table.worst(value):.3e}'
                )
        return '\n'.join(lines)
