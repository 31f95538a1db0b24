"""Uniform grids on the torus [-R, R)^{2n} with the Fourier pairing

    f^(xi) = integral of f(z) exp(-2 pi i Re <z, xi>) dz,

under which the Gaussian phi is its own transform. Grid functions are
periodic, so a function with compact spectral support is represented
exactly by its spectrum and can be evaluated anywhere.
"""
import logging
import warnings
from typing import Dict

import numpy as np

from qhalab.errors import AliasingWarning, InvalidParameterError
from qhalab.symbols import Symbol

log = logging.getLogger(__name__)

#: Spectral mass at the Nyquist planes, relative to the peak, above which a
#: transform is flagged as aliased.
ALIASING_TOLERANCE = 1e-8

#: Points evaluated per block when interpolating a grid function.
EVALUATION_CHUNK = 512


class SpectralGrid:
    """A uniform grid with `M` points per real axis on ``[-R, R)^{2n}``.

    :param n: Complex dimension; the grid has 2n real axes ordered
              (x1, y1, x2, y2, ...).
    :param R: Box radius.
    :param M: Points per axis, a power of two.
    """
    __slots__ = ('n', 'R', 'M')

    def __init__(self, n: int = 1, R: float = 6.0, M: int = 256):
        if int(n) != n or n < 1:
            raise InvalidParameterError(
                f'Grid dimension must be a positive integer, got {n!r}.'
            )
        if not R > 0:
            raise InvalidParameterError(
                f'Box radius must be positive, got {R!r}.'
            )
        if int(M) != M or M < 2 or int(M) & (int(M) - 1):
            raise InvalidParameterError(
                f'Points per axis must be a power of two, got {M!r}.'
            )
        self.n = int(n)
        self.R = float(R)
        self.M = int(M)

    @property
    def dims(self) -> int:
        return 2 * self.n

    @property
    def shape(self):
        return (self.M,) * self.dims

    @property
    def step(self) -> float:
        return 2 * self.R / self.M

    @property
    def freq_step(self) -> float:
        return 1 / (2 * self.R)

    @property
    def nyquist(self) -> float:
        return self.M / (4 * self.R)

    @property
    def cell(self) -> float:
        """Volume of one spatial cell."""
        return self.step ** self.dims

    @property
    def axis(self) -> np.ndarray:
        return -self.R + self.step * np.arange(self.M)

    @property
    def freq_axis(self) -> np.ndarray:
        return np.fft.fftfreq(self.M, d=self.step)

    def _pair(self, axis):
        mesh = np.meshgrid(*(axis,) * self.dims, indexing='ij')
        coords = np.stack([m.reshape(-1) for m in mesh], axis=1)
        return coords[:, 0::2] + 1j * coords[:, 1::2]

    def points(self) -> np.ndarray:
        """Spatial nodes as points of C^n, in C order over the grid."""
        return self._pair(self.axis)

    def frequencies(self) -> np.ndarray:
        """Frequency nodes as points of C^n, in FFT order."""
        return self._pair(self.freq_axis)

    def _sign(self) -> np.ndarray:
        q = np.round(self.freq_axis / self.freq_step).astype(int)
        sign = (-1.0) ** q
        out = np.ones(self.shape)
        for axis in range(self.dims):
            shape = [1] * self.dims
            shape[axis] = self.M
            out = out * sign.reshape(shape)
        return out

    def refined(self, factor: int = 2) -> 'SpectralGrid':
        """The same box sampled `factor` times more finely."""
        return SpectralGrid(self.n, self.R, self.M * factor)

    def to_dict(self) -> Dict:
        return {'n': self.n, 'box_radius': self.R, 'resolution': self.M}

    def __eq__(self, other):
        return (
            isinstance(other, SpectralGrid) and
            (self.n, self.R, self.M) == (other.n, other.R, other.M)
        )

    def __hash__(self):
        return hash((self.n, self.R, self.M))

    def __repr__(self):
        return f'<SpectralGrid(n={self.n}, R={self.R:g}, M={self.M})>'


def fft_forward(grid: SpectralGrid, values, *, check=True) -> np.ndarray:
    """Continuous Fourier transform sampled at the grid's frequencies.

    :param check: Warn with :class:`AliasingWarning` when the spectrum does
                  not decay before the Nyquist frequency. [default: True]
    """
    values = np.asarray(values, dtype=complex).reshape(grid.shape)
    spectrum = grid.cell * grid._sign() * np.fft.fftn(values)

    if check:
        peak = np.max(np.abs(spectrum))
        nyquist = max(
            np.max(np.abs(np.take(spectrum, grid.M // 2, axis=axis)))
            for axis in range(grid.dims)
        )
        if peak > 0 and nyquist > ALIASING_TOLERANCE * peak:
            warnings.warn(
                f'Spectrum on {grid!r} carries {nyquist / peak:.2e} of its'
                f' peak at the Nyquist frequency.',
                AliasingWarning,
                stacklevel=2
            )
    return spectrum


def fft_inverse(grid: SpectralGrid, spectrum) -> np.ndarray:
    """Inverse of :func:`fft_forward`."""
    spectrum = np.asarray(spectrum, dtype=complex).reshape(grid.shape)
    return np.fft.ifftn(spectrum * grid._sign()) / grid.cell


class GridFunction:
    """A function sampled on a :class:`SpectralGrid`.

    Either the samples or the spectrum may be supplied; the other is derived
    on demand. A spectrum supplied directly is kept as the exact
    representation, which matters for functions whose samples are too large
    to transform back accurately.
    """
    __slots__ = ('grid', '_values', '_spectrum', 'name', 'profile')

    def __init__(self, grid: SpectralGrid, *, values=None, spectrum=None,
                 name: str = 'grid', profile=None):
        if values is None and spectrum is None:
            raise InvalidParameterError(
                'A GridFunction needs values or a spectrum.'
            )
        self.grid = grid
        self._values = None if values is None else \
            np.asarray(values, dtype=complex).reshape(grid.shape)
        self._spectrum = None if spectrum is None else \
            np.asarray(spectrum, dtype=complex).reshape(grid.shape)
        self.name = name
        #: The continuous spectrum as a callable on points of C^n, when the
        #: function is known in closed form on the frequency side.
        self.profile = profile

    @classmethod
    def from_symbol(cls, grid: SpectralGrid, a: Symbol) -> 'GridFunction':
        values = a.sample(grid.points(), warn_unbounded=False)
        return cls(grid, values=values, name=a.name)

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = fft_inverse(self.grid, self._spectrum)
        return self._values

    @property
    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            self._spectrum = fft_forward(self.grid, self._values, check=False)
        return self._spectrum

    def integral(self) -> complex:
        return complex(self.grid.cell * np.sum(self.values))

    def l1_norm(self) -> float:
        return float(self.grid.cell * np.sum(np.abs(self.values)))

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __call__(self, z) -> np.ndarray:
        """Evaluate the trigonometric interpolant at arbitrary points.

        Only frequencies with a nonzero coefficient contribute, so functions
        with compact spectral support are cheap to evaluate.
        """
        points = np.asarray(z, dtype=complex)
        single = points.ndim < 2
        points = points.reshape(-1, self.grid.n)

        spectrum = self.spectrum.reshape(-1)
        support = np.nonzero(spectrum)[0]
        xi = self.grid.frequencies()[support]
        coeffs = spectrum[support] * self.grid.freq_step ** self.grid.dims

        out = np.empty(len(points), dtype=complex)
        for start in range(0, len(points), EVALUATION_CHUNK):
            chunk = points[start:start + EVALUATION_CHUNK]
            phase = np.real(chunk @ xi.conj().T)
            out[start:start + EVALUATION_CHUNK] = \
                np.exp(2j * np.pi * phase) @ coeffs
        return out[0] if single and len(out) == 1 else out

    def to_symbol(self) -> Symbol:
        """View as a grid-sampled :class:`~qhalab.symbols.Symbol`."""
        return Symbol(
            lambda points: self(points),
            kind='grid-sampled',
            sup_bound=self.sup(),
            name=self.name,
            params={'box_radius': self.grid.R, 'resolution': self.grid.M}
        )

    def to_dict(self) -> Dict:
        return {
            'box_radius': self.grid.R,
            'resolution': self.grid.M,
            'n': self.grid.n,
            'values': [
                [float(v.real), float(v.imag)]
                for v in self.values.reshape(-1)
            ]
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'GridFunction':
        grid = SpectralGrid(data.get('n', 1), data['box_radius'],
                            data['resolution'])
        pairs = np.asarray(data['values'], dtype=float)
        return cls(grid, values=pairs[:, 0] + 1j * pairs[:, 1])

    def __repr__(self):
        return f'<GridFunction({self.name!r}, {self.grid!r})>'
