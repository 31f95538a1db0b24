from qhalab.backends import _plugin_entry_points
from qhalab.report import Report


class Renderer:
    #: A dataclass that is used to pass options into the renderer. This
    #: dataclass is used to generate command line options.
    OPTIONS_CLASS = None
    #: A short, one-line description of this renderer. Used for command
    #: line help and error messages.
    DESCRIPTION = None

    def __init__(self, *, options=None):
        self.opts = self.OPTIONS_CLASS(**(options or {}))

    def render(self, report: Report) -> str:
        raise NotImplementedError()


def available_renderers():
    from qhalab.render.csv import CSVRenderer
    from qhalab.render.json import JSONRenderer
    from qhalab.render.txt import TXTRenderer

    renderers = {
        'json': JSONRenderer,
        'csv': CSVRenderer,
        'txt': TXTRenderer
    }
    renderers.update({
        entry_point.name: entry_point.load()
        for entry_point
        in _plugin_entry_points('qhalab.renderers')
    })
    return renderers
