"""Symbols: evaluable functions on C^n.

Symbols are vectorised: the evaluator receives an array of points of shape
``(m, n)`` and returns ``m`` complex values. Closed-form symbols remember
their parameters so fast paths (Gaussian quadrature, exact integrals) and
reports can use them.
"""
import itertools
import logging
import warnings
from typing import Callable, Dict, Optional

import numpy as np

from qhalab.errors import (
    InvalidParameterError,
    RejectedSymbolError,
    UnboundedSymbolWarning
)

log = logging.getLogger(__name__)

#: Known symbol kinds.
KINDS = (
    'constant',
    'gaussian',
    'polynomial',
    'plane-wave',
    'radial-profile',
    'quasi-radial-profile',
    'grid-sampled',
    'custom'
)


def _jsonable(value):
    value = np.asarray(value)
    if np.iscomplexobj(value):
        pairs = [[float(v.real), float(v.imag)] for v in value.reshape(-1)]
        return pairs if value.ndim else pairs[0]
    return value.tolist()


def _as_points(z):
    points = np.asarray(z, dtype=complex)
    if points.ndim == 0:
        return points.reshape(1, 1), True
    if points.ndim == 1:
        return points.reshape(1, -1), True
    return points, False


class Symbol:
    """A function a: C^n -> C with metadata.

    :param evaluator: Callable mapping points of shape ``(m, n)`` to values
                      of shape ``(m,)``.
    :param kind: One of :data:`KINDS`.
    :param is_radial: ``True`` if a(Az) = a(z) for every unitary A.
    :param sup_bound: A bound on sup |a|, or ``None`` if unbounded or
                      unknown.
    :param name: A short, stable name used in reports.
    :param params: Closed-form parameters for the kind.
    """
    __slots__ = ('evaluator', 'kind', 'is_radial', 'sup_bound', 'name',
                 'params')

    def __init__(self, evaluator: Callable, *, kind: str = 'custom',
                 is_radial: bool = False, sup_bound: Optional[float] = None,
                 name: str = None, params: Dict = None):
        if kind not in KINDS:
            raise InvalidParameterError(
                f'Unknown symbol kind {kind!r}, expected one of {KINDS}.'
            )
        self.evaluator = evaluator
        self.kind = kind
        self.is_radial = is_radial
        self.sup_bound = sup_bound
        self.name = name or kind
        self.params = params or {}

    def __call__(self, z) -> np.ndarray:
        points, single = _as_points(z)
        values = np.asarray(self.evaluator(points), dtype=complex)
        values = np.broadcast_to(values, (len(points),))
        return values[0] if single else values

    def sample(self, points: np.ndarray, *, warn_unbounded=True):
        """Evaluate on `points`, rejecting non-finite values.

        :param warn_unbounded: Emit an :class:`UnboundedSymbolWarning` when
                               the symbol has no sup bound.
                               [default: True]
        """
        values = np.array(self(np.atleast_2d(points)), dtype=complex)
        bad = ~np.isfinite(values)
        if bad.any():
            raise RejectedSymbolError(
                f'Symbol {self.name!r} produced {int(bad.sum())} non-finite'
                f' values, first at {np.atleast_2d(points)[bad][0]!r}.'
            )
        if warn_unbounded and self.sup_bound is None:
            warnings.warn(
                f'Symbol {self.name!r} has no sup bound; it is accepted'
                f' because every truncated operator is finite dimensional.',
                UnboundedSymbolWarning,
                stacklevel=3
            )
        return values

    def integral(self, n: int) -> Optional[complex]:
        """Closed-form integral over C^n against Lebesgue measure, when
        known."""
        if self.kind == 'gaussian':
            return self.params['amplitude'] * self.params['scale'] ** (2 * n)
        return None

    def moved(self, A: np.ndarray, z: np.ndarray) -> 'Symbol':
        """The symbol w -> a(A^{-1}(w - z)) for unitary `A`."""
        A = np.asarray(A, dtype=complex)
        z = np.asarray(z, dtype=complex).reshape(-1)
        A_inv = A.conj().T

        def evaluator(points):
            return self.evaluator((points - z[None, :]) @ A_inv.T)

        if self.kind == 'constant':
            return self

        if self.kind == 'gaussian':
            center = np.asarray(self.params['center'], dtype=complex)
            center = z + A @ center if center.size else z
            return gaussian(
                scale=self.params['scale'],
                amplitude=self.params['amplitude'],
                center=center,
                name=self.name
            )

        if self.is_radial and not np.any(z):
            return self

        return Symbol(
            evaluator,
            kind='custom',
            sup_bound=self.sup_bound,
            name=self.name
        )

    def translate(self, z) -> 'Symbol':
        """The translated symbol w -> a(w - z)."""
        z = np.asarray(z, dtype=complex).reshape(-1)
        return self.moved(np.eye(len(z)), z)

    def scaled(self, c: complex) -> 'Symbol':
        """The symbol c * a."""
        evaluator = self.evaluator
        params = dict(self.params)
        if self.kind == 'gaussian':
            params['amplitude'] = params['amplitude'] * c
            return gaussian(**params, name=self.name)
        return Symbol(
            lambda points: c * evaluator(points),
            kind=self.kind,
            is_radial=self.is_radial,
            sup_bound=None if self.sup_bound is None
            else abs(c) * self.sup_bound,
            name=f'{c!r}*{self.name}',
            params=params
        )

    def __add__(self, other: 'Symbol') -> 'Symbol':
        left, right = self.evaluator, other.evaluator
        bounds = (self.sup_bound, other.sup_bound)
        return Symbol(
            lambda points: left(points) + right(points),
            kind='custom',
            is_radial=self.is_radial and other.is_radial,
            sup_bound=None if None in bounds else sum(bounds),
            name=f'{self.name}+{other.name}'
        )

    def __sub__(self, other: 'Symbol') -> 'Symbol':
        return self + other.scaled(-1)

    def to_dict(self) -> Dict:
        return {
            'name': self.name,
            'kind': self.kind,
            'is_radial': self.is_radial,
            'sup_bound': self.sup_bound,
            'params': {
                key: _jsonable(value) for key, value in self.params.items()
            }
        }

    def __repr__(self):
        return f'<Symbol({self.name!r}, kind={self.kind!r})>'


def constant(c: complex = 1.0, *, name: str = None) -> Symbol:
    """The constant symbol c."""
    return Symbol(
        lambda points: np.full(len(points), c, dtype=complex),
        kind='constant',
        is_radial=True,
        sup_bound=abs(c),
        name=name or ('one' if c == 1 else f'constant({c!r})'),
        params={'value': c}
    )


def gaussian(scale: float = 1.0, *, amplitude: complex = 1.0,
             center=None, name: str = None) -> Symbol:
    """``amplitude * exp(-pi |z - center|^2 / scale^2)``.

    With the defaults this is the Gaussian phi, whose integral over C^n is 1
    and whose Fourier transform is itself.
    """
    if scale <= 0:
        raise InvalidParameterError(
            f'Gaussian scale must be positive, got {scale!r}.'
        )
    center = np.zeros(0) if center is None else \
        np.asarray(center, dtype=complex).reshape(-1)
    has_center = bool(np.any(center))

    def evaluator(points):
        shifted = points - center[None, :] if has_center else points
        r2 = np.sum(np.abs(shifted) ** 2, axis=1)
        return amplitude * np.exp(-np.pi * r2 / scale ** 2)

    return Symbol(
        evaluator,
        kind='gaussian',
        is_radial=not has_center,
        sup_bound=abs(amplitude),
        name=name or ('phi' if scale == 1 and amplitude == 1
                      and not has_center else f'gaussian({scale:g})'),
        params={
            'scale': float(scale),
            'amplitude': amplitude,
            'center': center if has_center else np.zeros(0)
        }
    )


def phi() -> Symbol:
    """The Gaussian ``exp(-pi |z|^2)``."""
    return gaussian()


def dilated_gaussian(t: float, n: int = 1) -> Symbol:
    """Unit-mass Gaussian ``t^{-2n} exp(-pi |z|^2 / t^2)`` on C^n."""
    return gaussian(t, amplitude=t ** (-2 * n), name=f'psi_t({t:g})')


def abs_squared() -> Symbol:
    """The unbounded radial symbol ``|z|^2``."""
    return Symbol(
        lambda points: np.sum(np.abs(points) ** 2, axis=1).astype(complex),
        kind='polynomial',
        is_radial=True,
        name='abs_squared'
    )


def coordinate(j: int = 0) -> Symbol:
    """The coordinate function ``z_j``."""
    return Symbol(
        lambda points: points[:, j],
        kind='polynomial',
        name=f'z{j + 1}',
        params={'j': j}
    )


def real_part(j: int = 0) -> Symbol:
    """The real, unbounded symbol ``2 Re z_j``."""
    return Symbol(
        lambda points: 2 * points[:, j].real + 0j,
        kind='polynomial',
        name=f'2re_z{j + 1}',
        params={'j': j}
    )


def polynomial(terms: Dict, *, name: str = 'polynomial') -> Symbol:
    """The polynomial ``sum c z^j conj(z)^k`` over ``{(j, k): c}`` with
    multi-indices j and k."""
    items = [
        (np.asarray(j), np.asarray(k), complex(c))
        for (j, k), c in terms.items()
    ]

    def evaluator(points):
        out = np.zeros(len(points), dtype=complex)
        for j, k, c in items:
            out += c * np.prod(points ** j * points.conj() ** k, axis=1)
        return out

    return Symbol(
        evaluator,
        kind='polynomial',
        name=name,
        params={'degree': max(
            (int(j.sum() + k.sum()) for j, k, _ in items), default=0
        )}
    )


def random_polynomial(n: int = 1, degree: int = 2, *, seed: int = 0,
                      bound: float = None) -> Symbol:
    """A polynomial in z and conj(z) with seeded Gaussian coefficients.

    :param bound: Record this sup bound, for use on bounded domains.
    """
    rng = np.random.default_rng(seed)
    exponents = [
        k for k in itertools.product(range(degree + 1), repeat=2 * n)
        if sum(k) <= degree
    ]
    terms = {
        (k[:n], k[n:]): complex(*rng.standard_normal(2)) / len(exponents)
        for k in exponents
    }
    result = polynomial(terms, name=f'random_polynomial({seed})')
    result.sup_bound = bound
    return result


def plane_wave(w0) -> Symbol:
    """``exp(2 pi i Re <z, w0>)``, a character of C^n."""
    w0 = np.asarray(w0, dtype=complex).reshape(-1)

    def evaluator(points):
        return np.exp(2j * np.pi * np.real(points @ w0.conj()))

    return Symbol(
        evaluator,
        kind='plane-wave',
        is_radial=not np.any(w0),
        sup_bound=1.0,
        name='plane_wave',
        params={'w0': w0}
    )


def radial_profile(profile: Callable, *, sup_bound: float = None,
                   name: str = 'radial') -> Symbol:
    """The radial symbol ``profile(|z|)``."""
    return Symbol(
        lambda points: profile(np.linalg.norm(points, axis=1)) + 0j,
        kind='radial-profile',
        is_radial=True,
        sup_bound=sup_bound,
        name=name
    )


def quasi_radial_profile(profile: Callable, partition, *,
                         sup_bound: float = None,
                         name: str = 'quasi_radial') -> Symbol:
    """``profile(r_1, ..., r_k)`` where r_i is the norm of the i-th block of
    coordinates given by `partition`."""
    bounds = np.cumsum((0,) + tuple(partition))

    def evaluator(points):
        radii = [
            np.linalg.norm(points[:, bounds[i]:bounds[i + 1]], axis=1)
            for i in range(len(partition))
        ]
        return profile(*radii) + 0j

    return Symbol(
        evaluator,
        kind='quasi-radial-profile',
        is_radial=len(partition) == 1,
        sup_bound=sup_bound,
        name=name,
        params={'partition': tuple(partition)}
    )


def registry() -> Dict[str, Callable[..., Symbol]]:
    """Named symbol factories selectable from a configuration file.

    Every factory takes the complex dimension `n` as its only argument.
    """
    return {
        'one': lambda n: constant(1.0),
        'phi': lambda n: phi(),
        'gaussian_half': lambda n: gaussian(0.5, name='gaussian_half'),
        'shifted_gaussian': lambda n: gaussian(
            center=np.full(n, 0.25 + 0.25j), name='shifted_gaussian'
        ),
        'plane_wave': lambda n: plane_wave(np.full(n, 0.5) / np.sqrt(n)),
        'radial_bump': lambda n: radial_profile(
            lambda r: 1 / (1 + r ** 2), sup_bound=1.0, name='radial_bump'
        ),
        'abs_squared': lambda n: abs_squared(),
        'real_part': lambda n: real_part(0)
    }


def from_name(name: str, n: int = 1) -> Symbol:
    """Build the registry symbol `name` on C^n."""
    factories = registry()
    if name not in factories:
        raise InvalidParameterError(
            f'Unknown symbol {name!r}, expected one of {sorted(factories)}.'
        )
    return factories[name](n)
