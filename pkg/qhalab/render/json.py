import json
from dataclasses import dataclass

from qhalab.render import Renderer
from qhalab.report import Report


@dataclass
class Options:
    #: ``True`` to render the report with indentation.
    pretty_print: bool = True
    #: Include wall-clock timings. Reports of identical runs differ only in
    #: their timings.
    timing: bool = True


class JSONRenderer(Renderer):
    """
    Renders a report as a JSON document, the format written to
    ``report.json``.
    """
    OPTIONS_CLASS = Options
    DESCRIPTION = 'Renders to a JSON document.'

    def render(self, report: Report) -> str:
        return json.dumps(
            report.to_dict(timing=self.opts.timing),
            indent=4 if self.opts.pretty_print else 0
        )
