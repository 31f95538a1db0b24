"""Convolutions of quantum harmonic analysis.

Four products are provided:

- :func:`conv_ff`, function with function, computed spectrally on a
  :class:`~qhalab.grid.SpectralGrid`;
- :func:`conv_fo`, function with operator, the weighted sum of operator
  translates ``sum_i w_i psi(z_i) W_{z_i} S W_{z_i}^*``;
- :func:`conv_oo`, operator with operator, the function
  ``z -> Tr(T W_z (U S U) W_z^*)``;
- :func:`conv_symbol_op`, a bounded symbol with a trace-class operator,
  realised by the same weak integral as :func:`conv_fo`.
"""
import logging
import warnings
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from qhalab.backends.fock import hermite_rule, real_to_complex
from qhalab.errors import (
    InvalidParameterError,
    QuadratureError,
    TruncationWarning
)
from qhalab.grid import GridFunction, SpectralGrid
from qhalab.operators import (
    TAIL_TOLERANCE,
    BerezinFunction,
    OperatorMatrix,
    parity,
    weyl_batch
)
from qhalab.space import TruncatedSpace
from qhalab.symbols import Symbol

log = logging.getLogger(__name__)

#: Relative size of a function on the boundary of the integration box above
#: which the box is considered too small.
LEAKAGE_TOLERANCE = 1e-10

#: Nodes per block in translation sums.
TRANSLATION_CHUNK = 256

#: Largest number of grid points per axis used when a grid function is the
#: weight of a translation sum.
GRID_NODES_PER_AXIS = {1: 128, 2: 16}

Function = Union[Symbol, GridFunction]


@dataclass(frozen=True, eq=False)
class ConvQuadrature:
    """Nodes and Lebesgue weights for integrals over C^n.

    ``sum(weights * f(nodes))`` approximates the integral of `f` over C^n
    with respect to Lebesgue measure.
    """
    #: Points in C^n, shape ``(m, n)``.
    nodes: np.ndarray
    #: Lebesgue weights, shape ``(m,)``.
    weights: np.ndarray
    #: Half-width of the box covered by the nodes.
    box_radius: float
    #: Points per real axis.
    resolution: int
    #: ``uniform``, ``hermite`` or ``grid``.
    kind: str = 'uniform'

    @classmethod
    def uniform(cls, n: int = 1, R: float = 3.0,
                resolution: int = 25) -> 'ConvQuadrature':
        """Trapezoidal rule on ``[-R, R]^{2n}`` with `resolution` points per
        axis, endpoints included."""
        if resolution < 2:
            raise InvalidParameterError(
                f'Uniform quadrature needs at least two points per axis,'
                f' got {resolution!r}.'
            )
        axis, h = np.linspace(-R, R, resolution, retstep=True)
        mesh = np.meshgrid(*(axis,) * (2 * n), indexing='ij')
        x = np.stack([m.reshape(-1) for m in mesh], axis=1)
        weights = np.ones(len(x))
        for m in mesh:
            edge = np.where(np.isclose(np.abs(m), R), 0.5, 1.0).reshape(-1)
            weights = weights * edge
        return cls(
            nodes=real_to_complex(x),
            weights=weights * h ** (2 * n),
            box_radius=float(R),
            resolution=int(resolution),
            kind='uniform'
        )

    @classmethod
    def hermite(cls, n: int = 1, order: int = None, scale: float = 1.0,
                center=None) -> 'ConvQuadrature':
        """Gauss-Hermite rule adapted to ``exp(-pi |z - center|^2 /
        scale^2)``.

        Gaussians of the same scale and center are integrated to machine
        precision against polynomial factors.
        """
        if order is None:
            order = 48 if n == 1 else 10
        x, w = hermite_rule(order, 2 * n, scale=scale)
        z = real_to_complex(x)
        r2 = np.sum(np.abs(z) ** 2, axis=1)
        weights = w * scale ** (2 * n) * np.exp(np.pi * r2 / scale ** 2)
        if center is not None:
            z = z + np.asarray(center, dtype=complex).reshape(1, -1)
        return cls(
            nodes=z,
            weights=weights,
            box_radius=float(np.max(np.abs(x))),
            resolution=int(order),
            kind='hermite'
        )

    @classmethod
    def from_grid(cls, grid: SpectralGrid,
                  stride: int = None) -> 'ConvQuadrature':
        """Every `stride`-th node of a spectral grid."""
        if stride is None:
            cap = GRID_NODES_PER_AXIS.get(grid.n, 8)
            stride = max(1, grid.M // cap)
        if grid.M % stride:
            raise InvalidParameterError(
                f'Stride {stride} does not divide the grid resolution'
                f' {grid.M}.'
            )
        sub = SpectralGrid(grid.n, grid.R, grid.M // stride)
        return cls(
            nodes=sub.points(),
            weights=np.full(sub.M ** sub.dims, sub.cell),
            box_radius=grid.R,
            resolution=sub.M,
            kind='grid'
        )

    def weigh(self, psi: Function) -> np.ndarray:
        """Weights multiplied by `psi` at the nodes."""
        if isinstance(psi, GridFunction) and self.kind == 'grid':
            stride = psi.grid.M // self.resolution
            values = psi.values[(slice(None, None, stride),) * psi.grid.dims]
            return self.weights * values.reshape(-1)
        return self.weights * psi.sample(self.nodes, warn_unbounded=False)

    def __len__(self):
        return len(self.weights)

    def __repr__(self):
        return (
            f'<ConvQuadrature({self.kind}, nodes={len(self.weights)},'
            f' R={self.box_radius:g})>'
        )


def default_quadrature(psi: Function, n: int) -> ConvQuadrature:
    """Gauss-Hermite for Gaussians, the function's own grid for grid
    functions and the uniform box otherwise."""
    if isinstance(psi, GridFunction):
        return ConvQuadrature.from_grid(psi.grid)
    if psi.kind == 'gaussian':
        center = psi.params['center']
        return ConvQuadrature.hermite(
            n,
            scale=psi.params['scale'],
            center=center if center.size else None
        )
    return ConvQuadrature.uniform(n)


def _check_box(psi: Symbol, quadrature: ConvQuadrature):
    if quadrature.kind != 'uniform':
        return
    values = np.abs(psi.sample(quadrature.nodes, warn_unbounded=False))
    x = np.concatenate([quadrature.nodes.real, quadrature.nodes.imag], axis=1)
    boundary = np.any(np.isclose(np.abs(x), quadrature.box_radius), axis=1)
    peak = np.max(values)
    leak = np.max(values[boundary]) if boundary.any() else 0.0
    if peak > 0 and leak > LEAKAGE_TOLERANCE * peak:
        raise QuadratureError(
            f'{psi!r} is {leak / peak:.2e} of its peak on the boundary of'
            f' the box of radius {quadrature.box_radius:g}; use a larger'
            f' box.'
        )


def _check_grid_box(psi: GridFunction):
    values = np.abs(psi.values)
    leak = max(
        np.max(np.take(values, 0, axis=axis)) for axis in range(values.ndim)
    )
    peak = np.max(values)
    if peak > 0 and leak > LEAKAGE_TOLERANCE * peak:
        raise QuadratureError(
            f'{psi.name!r} is {leak / peak:.2e} of its peak on the boundary'
            f' of {psi.grid!r}; use a larger box.'
        )


def translation_sum(space: TruncatedSpace, nodes: np.ndarray,
                    coeffs: np.ndarray, S: OperatorMatrix, *,
                    method: str = 'laguerre',
                    diagnostics: List[str] = None) -> np.ndarray:
    """``sum_i coeffs[i] * W_{z_i} S W_{z_i}^*`` as a dense matrix.

    Terms are accumulated block by block in node order, so repeated runs
    give identical results.
    """
    entries = S.entries
    total = np.zeros((space.dim, space.dim), dtype=complex)
    size = space.leading_dim()
    leak = 0.0

    keep = coeffs != 0
    nodes, coeffs = nodes[keep], coeffs[keep]

    for start in range(0, len(nodes), TRANSLATION_CHUNK):
        W = weyl_batch(
            space, nodes[start:start + TRANSLATION_CHUNK], method=method
        )
        c = coeffs[start:start + TRANSLATION_CHUNK]
        total += np.einsum(
            'm,mij,mkj->ik', c, W @ entries, W.conj(), optimize=True
        )
        rows = np.sum(np.abs(W[:, :size, :]) ** 2, axis=2)
        leak += np.sum(np.abs(c) * np.max(1 - rows, axis=1))

    mass = np.sum(np.abs(coeffs))
    if mass > 0 and diagnostics is not None and \
            leak / mass > TAIL_TOLERANCE:
        diagnostics.append(
            f'Translated leading block leaks {leak / mass:.2e} on average'
            f' out of degree {space.N}.'
        )

    log.debug('translation_sum over %d nodes on %r', len(nodes), space)
    return total


def _fock(space: TruncatedSpace, what: str):
    if not space.is_fock:
        raise InvalidParameterError(
            f'{what} is only defined on the Fock space, got {space!r}.'
        )


def conv_ff(psi: Function, a: Function, grid: SpectralGrid) -> GridFunction:
    """The convolution ``(psi * a)(z) = integral a(z - w) psi(w) dw``.

    Both factors are sampled on `grid` and multiplied spectrally, so `a`
    must be periodic on the box (decaying, constant, or a plane wave whose
    frequency lies on the grid).

    :raises QuadratureError: `psi` does not decay inside the box.
    """
    if isinstance(psi, Symbol):
        psi = GridFunction.from_symbol(grid, psi)
        _check_grid_box(psi)
    if isinstance(a, Symbol):
        if a.sup_bound is None:
            warnings.warn(
                f'Convolving with the unbounded symbol {a.name!r}; the'
                f' result is only meaningful away from the box boundary.',
                TruncationWarning,
                stacklevel=2
            )
        a = GridFunction.from_symbol(grid, a)

    result = GridFunction(
        grid,
        spectrum=psi.spectrum * a.spectrum,
        name=f'{psi.name}*{a.name}'
    )

    bound = psi.l1_norm() * a.sup()
    if result.sup() > bound + 1e-8:
        log.warning('conv_ff: sup %.3e exceeds |psi|_1 |a|_inf = %.3e',
                    result.sup(), bound)
    return result


def conv_fo(psi: Function, S: OperatorMatrix, *,
            quadrature: ConvQuadrature = None,
            method: str = 'laguerre') -> OperatorMatrix:
    """The operator ``psi * S = integral psi(z) alpha_z(S) dz``.

    A :class:`TruncationWarning` is emitted when the translates leak out of
    the truncation by more than :data:`TAIL_TOLERANCE` on average.
    """
    space = S.space
    _fock(space, 'conv_fo()')
    if quadrature is None:
        quadrature = default_quadrature(psi, space.n)
    if isinstance(psi, Symbol):
        _check_box(psi, quadrature)

    diagnostics = []
    entries = translation_sum(
        space,
        quadrature.nodes,
        quadrature.weigh(psi),
        S,
        method=method,
        diagnostics=diagnostics
    )
    for message in diagnostics:
        warnings.warn(message, TruncationWarning, stacklevel=2)
    return OperatorMatrix(space, entries, diagnostics=diagnostics)


def conv_symbol_op(a: Symbol, S: OperatorMatrix, *,
                   quadrature: ConvQuadrature = None,
                   method: str = 'laguerre') -> OperatorMatrix:
    """The operator ``a * S = integral a(z) alpha_z(S) dz``.

    `S` should be concentrated on low degrees, in which case its translates
    decay like the Gaussian and the default Gauss-Hermite rule of unit scale
    integrates them exactly. With ``S = Phi`` the result is the Toeplitz
    operator T_a.
    """
    space = S.space
    _fock(space, 'conv_symbol_op()')
    if quadrature is None:
        quadrature = ConvQuadrature.hermite(space.n)

    samples = a.sample(quadrature.nodes)
    coeffs = quadrature.weights * samples
    diagnostics = []
    entries = translation_sum(
        space,
        quadrature.nodes,
        coeffs,
        S,
        method=method,
        diagnostics=diagnostics
    )
    if not np.any(samples.imag) and \
            np.allclose(S.entries, S.entries.conj().T):
        entries = (entries + entries.conj().T) / 2
    return OperatorMatrix(space, entries, diagnostics=diagnostics)


def conv_oo(T: OperatorMatrix, S: OperatorMatrix) -> BerezinFunction:
    """The function ``(T * S)(z) = Tr(T alpha_z(U S U))``, with U the parity
    operator."""
    space = S.space
    _fock(space, 'conv_oo()')
    if T.space != space:
        raise InvalidParameterError(
            f'Cannot convolve operators on {T.space!r} and {space!r}.'
        )

    U = parity(space)
    reflected = (U @ S @ U).entries
    left = T.entries

    def evaluator(points):
        out = np.empty(len(points), dtype=complex)
        for start in range(0, len(points), TRANSLATION_CHUNK):
            W = weyl_batch(space, points[start:start + TRANSLATION_CHUNK])
            out[start:start + TRANSLATION_CHUNK] = np.einsum(
                'ij,mjl,mil->m', left, W @ reflected, W.conj(),
                optimize=True
            )
        return out

    return BerezinFunction(
        evaluator,
        source=(T, S),
        name='conv_oo'
    )


@dataclass(frozen=True)
class RegularityReport:
    """Outcome of a regularity check on a grid."""
    #: ``True`` if the smallest |f^| exceeds the threshold.
    regular: bool
    #: The smallest |f^| over the examined frequencies.
    minimum: float
    #: The frequency, as a point of C^n, where the minimum is attained.
    location: Tuple[complex, ...]
    threshold: float

    def __bool__(self):
        return self.regular

    def to_dict(self) -> Dict:
        return {
            'regular': self.regular,
            'minimum': self.minimum,
            'location': [[z.real, z.imag] for z in self.location],
            'threshold': self.threshold
        }


def is_regular_function(psi: Function, grid: SpectralGrid, *,
                        threshold: float = 1e-12,
                        radius: Optional[float] = None) -> RegularityReport:
    """Decide whether the Fourier transform of `psi` vanishes nowhere on the
    frequency grid.

    :param threshold: Numerical stand-in for zero. [default: 1e-12]
    :param radius: Only examine frequencies with ``|xi| <= radius``.
    """
    if isinstance(psi, Symbol):
        psi = GridFunction.from_symbol(grid, psi)
    magnitude = np.abs(psi.spectrum).reshape(-1)
    xi = grid.frequencies()

    if radius is not None:
        inside = np.linalg.norm(xi, axis=1) <= radius
        magnitude, xi = magnitude[inside], xi[inside]

    i = int(np.argmin(magnitude))
    minimum = float(magnitude[i])
    report = RegularityReport(
        regular=minimum > threshold,
        minimum=minimum,
        location=tuple(complex(v) for v in xi[i]),
        threshold=threshold
    )
    log.debug('is_regular_function(%r): %r', psi, report)
    return report


def is_regular_operator(Psi: OperatorMatrix, grid: SpectralGrid,
                        **kwargs) -> RegularityReport:
    """An operator is regular when its self-convolution is a regular
    function; Phi is regular since ``Phi * Phi = phi``."""
    values = conv_oo(Psi, Psi)(grid.points())
    return is_regular_function(
        GridFunction(grid, values=values, name='Psi*Psi'), grid, **kwargs
    )
