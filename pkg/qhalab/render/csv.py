import csv
import io
from dataclasses import dataclass

from qhalab.render import Renderer
from qhalab.report import ErrorTable, Report


@dataclass
class Options:
    #: Emit a header row.
    header: bool = True


class CSVRenderer(Renderer):
    """
    Renders the records of a report as CSV, one row per checked identity.
    Error tables are rendered separately with :meth:`render_table`.
    """
    OPTIONS_CLASS = Options
    DESCRIPTION = 'Renders records and error tables as CSV.'

    def render(self, report: Report) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator='\n')
        if self.opts.header:
            writer.writerow(('identity', 'error', 'tolerance', 'passed'))
        for record in report.records:
            writer.writerow((
                record.identity,
                repr(record.error),
                repr(record.tolerance),
                record.passed
            ))
        return out.getvalue()

    def render_table(self, table: ErrorTable) -> str:
        """Render one error table with columns parameter, index, error."""
        out = io.StringIO()
        writer = csv.writer(out, lineterminator='\n')
        if self.opts.header:
            writer.writerow(table.header())
        for value, index, error in table.rows:
            writer.writerow((repr(value), index, repr(error)))
        return out.getvalue()
