"""Run configuration.

Configuration files are INI documents with the sections ``[space]``,
``[grid]``, ``[group]``, ``[symbols]``, ``[schedule]``, ``[tolerances]`` and
``[run]``. Every key is optional; see the dataclasses below for the
defaults. For example::

    [space]
    n = 1
    N = 16

    [schedule]
    t = 1, 1/2, 1/4, 1/8

    [tolerances]
    scale = 10
"""
import configparser
import dataclasses
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple

from qhalab.backends import available_backends
from qhalab.errors import ConfigError

#: Environment variable overriding ``[run] out_dir``.
OUT_DIR_ENV = 'QHALAB_OUT_DIR'

#: Subgroup kinds accepted in ``[group] kind``.
GROUP_KINDS = ('torus', 'quasi_radial', 'full_unitary', 'translations')

#: Largest number of points in a spectral grid.
MAX_GRID_POINTS = 2 ** 24


@dataclass(frozen=True)
class SpaceConfig:
    #: Complex dimension.
    n: int = 1
    #: Truncation degree.
    N: int = 16
    #: Quadrature order, ``None`` for the backend default.
    order: Optional[int] = None
    #: ``fock`` or ``bergman``.
    space_kind: str = 'fock'


@dataclass(frozen=True)
class GridConfig:
    #: Box radius.
    R: float = 6.0
    #: Points per axis, a power of two.
    M: int = 256


@dataclass(frozen=True)
class GroupConfig:
    kind: str = 'torus'
    #: Block sizes for ``quasi_radial``, ``None`` for all ones.
    partition: Optional[Tuple[int, ...]] = None
    angle_grid: int = 32
    mc_samples: int = 4096
    seed: int = 0


@dataclass(frozen=True)
class SymbolsConfig:
    #: Registry symbols exercised by the suites.
    names: Tuple[str, ...] = (
        'phi', 'gaussian_half', 'shifted_gaussian', 'plane_wave',
        'radial_bump'
    )


@dataclass(frozen=True)
class ScheduleConfig:
    #: Strictly decreasing dilation parameters.
    t: Tuple[float, ...] = (1.0, 0.5, 0.25, 0.125)


@dataclass(frozen=True)
class ToleranceConfig:
    #: Gram matrix, quadrature mass and positivity.
    orthonormality: float = 1e-10
    reproducing: float = 1e-8
    #: Norm deficit of truncated normalised kernels.
    kernel_tail: float = 1e-6
    #: Identities that hold up to rounding.
    projection: float = 1e-12
    #: Toeplitz operators as convolutions with Phi, and Berezin transforms
    #: of Toeplitz operators.
    toeplitz: float = 1e-6
    berezin: float = 1e-8
    #: Convolution and group identities on the leading block.
    identity: float = 1e-5
    norm_bound: float = 1e-8
    representation: float = 1e-6
    wiener: float = 1e-8
    radiality: float = 1e-10
    sot: float = 1e-3
    contraction: float = 1e-10
    density: float = 1e-8
    #: Multiplies every tolerance.
    scale: float = 1.0

    def get(self, name: str) -> float:
        return getattr(self, name) * self.scale


@dataclass(frozen=True)
class OutputConfig:
    seed: int = 0
    out_dir: str = 'qhalab-out'


@dataclass(frozen=True)
class RunConfig:
    """The complete configuration of a suite or study run."""
    space: SpaceConfig = field(default_factory=SpaceConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    group: GroupConfig = field(default_factory=GroupConfig)
    symbols: SymbolsConfig = field(default_factory=SymbolsConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    run: OutputConfig = field(default_factory=OutputConfig)

    @classmethod
    def from_string(cls, text: str) -> 'RunConfig':
        parser = configparser.ConfigParser(interpolation=None)
        # Keys are case sensitive; N and n are different keys.
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as e:
            raise ConfigError(f'Unreadable configuration: {e}')
        return _from_parser(parser)

    @classmethod
    def from_file(cls, path) -> 'RunConfig':
        with open(path, 'rt') as source:
            return cls.from_string(source.read())

    def with_overrides(self, *, seed: int = None, tol_scale: float = None,
                       out_dir: str = None,
                       environ: Mapping[str, str] = None) -> 'RunConfig':
        """Apply the environment, then explicit overrides.

        :param environ: [default: os.environ]
        """
        environ = os.environ if environ is None else environ
        run = self.run
        tolerances = self.tolerances
        if environ.get(OUT_DIR_ENV):
            run = dataclasses.replace(run, out_dir=environ[OUT_DIR_ENV])
        if out_dir is not None:
            run = dataclasses.replace(run, out_dir=out_dir)
        if seed is not None:
            if seed < 0:
                raise ConfigError('must be nonnegative', field_path='run.seed')
            run = dataclasses.replace(run, seed=seed)
        if tol_scale is not None:
            if not tol_scale > 0:
                raise ConfigError(
                    'must be positive', field_path='tolerances.scale'
                )
            tolerances = dataclasses.replace(tolerances, scale=tol_scale)
        return dataclasses.replace(self, run=run, tolerances=tolerances)

    def to_dict(self) -> Dict:
        return dataclasses.asdict(self)

    def to_ini(self) -> str:
        lines = []
        for section in SECTIONS:
            lines.append(f'[{section}]')
            value = getattr(self, section)
            for f in dataclasses.fields(value):
                lines.append(f'{f.name} = {_format(getattr(value, f.name))}')
            lines.append('')
        return '\n'.join(lines)

    def build_space(self, **overrides):
        """The :class:`~qhalab.space.TruncatedSpace` described by
        ``[space]``."""
        from qhalab.space import TruncatedSpace
        options = {**dataclasses.asdict(self.space), **overrides}
        return TruncatedSpace(
            options['n'], options['N'],
            space_kind=options['space_kind'],
            order=options['order']
        )

    def build_grid(self):
        from qhalab.grid import SpectralGrid
        return SpectralGrid(self.space.n, self.grid.R, self.grid.M)

    def build_group(self):
        from qhalab import groups
        g = self.group
        n = self.space.n
        if g.kind == 'torus':
            return groups.Torus(n, g.angle_grid)
        if g.kind == 'quasi_radial':
            return groups.QuasiRadialBlocks(
                g.partition or (1,) * n, g.angle_grid, g.mc_samples, g.seed
            )
        if g.kind == 'full_unitary':
            return groups.FullUnitary(n, g.mc_samples, g.seed)
        return groups.Translations(n)


#: Sections in file order.
SECTIONS = (
    'space', 'grid', 'group', 'symbols', 'schedule', 'tolerances', 'run'
)


def _format(value) -> str:
    if value is None:
        return 'auto'
    if isinstance(value, tuple):
        return ', '.join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _number(kind):
    def parse(text):
        text = text.strip()
        if kind is int:
            return int(text)
        return float(Fraction(text))
    return parse


def _optional(parse):
    def wrapper(text):
        return None if text.strip() in ('', 'auto') else parse(text)
    return wrapper


def _tuple(parse):
    def wrapper(text):
        return tuple(parse(part) for part in text.split(',') if part.strip())
    return wrapper


def _name(text):
    return text.strip()


def _check(condition: bool, message: str, path: str):
    if not condition:
        raise ConfigError(message, field_path=path)


def _is_power_of_two(m: int) -> bool:
    return m >= 2 and not m & (m - 1)


_PARSERS = {
    'space': {
        'n': _number(int), 'N': _number(int),
        'order': _optional(_number(int)), 'space_kind': _name
    },
    'grid': {'R': _number(float), 'M': _number(int)},
    'group': {
        'kind': _name, 'partition': _optional(_tuple(_number(int))),
        'angle_grid': _number(int), 'mc_samples': _number(int),
        'seed': _number(int)
    },
    'symbols': {'names': _tuple(_name)},
    'schedule': {'t': _tuple(_number(float))},
    'tolerances': {
        f.name: _number(float) for f in dataclasses.fields(ToleranceConfig)
    },
    'run': {'seed': _number(int), 'out_dir': _name}
}

_CLASSES = {
    'space': SpaceConfig, 'grid': GridConfig, 'group': GroupConfig,
    'symbols': SymbolsConfig, 'schedule': ScheduleConfig,
    'tolerances': ToleranceConfig, 'run': OutputConfig
}


def _from_parser(parser: configparser.ConfigParser) -> RunConfig:
    sections = {}
    for section in parser.sections():
        if section not in _PARSERS:
            raise ConfigError(
                f'unknown section, expected one of {list(SECTIONS)}',
                field_path=section
            )
        values = {}
        for key, text in parser.items(section):
            path = f'{section}.{key}'
            if key not in _PARSERS[section]:
                raise ConfigError(
                    f'unknown key, expected one of'
                    f' {sorted(_PARSERS[section])}',
                    field_path=path
                )
            try:
                values[key] = _PARSERS[section][key](text)
            except (ValueError, ZeroDivisionError) as e:
                raise ConfigError(f'cannot parse {text!r}: {e}',
                                  field_path=path)
        sections[section] = _CLASSES[section](**values)

    config = RunConfig(**sections)
    _validate(config)
    return config


def _validate(config: RunConfig):
    from qhalab.symbols import registry

    s = config.space
    _check(1 <= s.n <= 4, f'must be between 1 and 4, got {s.n}', 'space.n')
    _check(0 <= s.N <= 64, f'must be between 0 and 64, got {s.N}', 'space.N')
    _check(s.order is None or s.order >= 1,
           f'must be positive, got {s.order}', 'space.order')
    _check(s.space_kind in available_backends(),
           f'unknown space kind {s.space_kind!r}', 'space.space_kind')

    g = config.grid
    _check(g.R > 0, f'must be positive, got {g.R}', 'grid.R')
    _check(_is_power_of_two(g.M), f'must be a power of two, got {g.M}',
           'grid.M')
    _check(g.M ** (2 * s.n) <= MAX_GRID_POINTS,
           f'{g.M}^{2 * s.n} grid points exceed {MAX_GRID_POINTS}', 'grid.M')

    group = config.group
    _check(group.kind in GROUP_KINDS,
           f'unknown group kind {group.kind!r}, expected one of'
           f' {list(GROUP_KINDS)}', 'group.kind')
    if group.partition is not None:
        _check(all(p >= 1 for p in group.partition)
               and sum(group.partition) == s.n,
               f'must be positive block sizes summing to n={s.n}',
               'group.partition')
    _check(group.angle_grid >= 1, 'must be positive', 'group.angle_grid')
    _check(group.mc_samples >= 1, 'must be positive', 'group.mc_samples')
    _check(group.seed >= 0, 'must be nonnegative', 'group.seed')

    known = registry()
    for name in config.symbols.names:
        _check(name in known, f'unknown symbol {name!r}', 'symbols.names')

    t = config.schedule.t
    _check(len(t) > 0, 'must not be empty', 'schedule.t')
    _check(all(v > 0 for v in t), 'must be positive', 'schedule.t')
    _check(all(b < a for a, b in zip(t, t[1:])),
           'must be strictly decreasing', 'schedule.t')

    for f in dataclasses.fields(ToleranceConfig):
        value = getattr(config.tolerances, f.name)
        _check(value > 0, f'must be positive, got {value}',
               f'tolerances.{f.name}')

    _check(config.run.seed >= 0, 'must be nonnegative', 'run.seed')


def load_config(path=None) -> RunConfig:
    """Load `path`, or the defaults when `path` is ``None``."""
    if path is None:
        return RunConfig()
    try:
        return RunConfig.from_file(path)
    except OSError as e:
        raise ConfigError(f'cannot read {path}: {e.strerror}')


__all__ = (
    'ConfigError',
    'GridConfig',
    'GroupConfig',
    'OutputConfig',
    'RunConfig',
    'ScheduleConfig',
    'SpaceConfig',
    'SymbolsConfig',
    'ToleranceConfig',
    'load_config'
)
