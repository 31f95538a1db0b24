"""Band-limited approximate identities, Wiener division and the
approximation of operators by Toeplitz operators in the strong operator
topology.

The pipeline for an operator S and a scale t is::

    f_t * S = h_t * (phi * S) = h_t * T_{B(S)} = T_{h_t * B(S)}

where f_t is a radial approximate identity with compactly supported
spectrum and h_t solves ``f_t = phi * h_t``. Every stage is computed on the
frequency side of a :class:`~qhalab.grid.SpectralGrid`.
"""
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Union

import numpy as np
from scipy.special import roots_legendre

from qhalab.conv import conv_fo
from qhalab.errors import DivisionError, InvalidParameterError
from qhalab.grid import GridFunction, SpectralGrid, fft_forward, fft_inverse
from qhalab.operators import OperatorMatrix, berezin, toeplitz
from qhalab.report import ErrorTable
from qhalab.space import TruncatedSpace
from qhalab.symbols import Symbol, phi

__all__ = (
    'PROFILE_VERSION',
    'BandLimitedFamily',
    'GridFunction',
    'PipelineStage',
    'SotApproximation',
    'SpectralGrid',
    'angular_variation',
    'approx_identity',
    'approx_identity_sot_check',
    'bump',
    'division_residual',
    'fft_forward',
    'fft_inverse',
    'sot_toeplitz_approximation',
    'spectrum_of',
    'wiener_divide'
)

log = logging.getLogger(__name__)

#: Version label of the spectral profile, echoed into reports.
PROFILE_VERSION = 'bump-v2'

#: Spectral support radius of f_1. The support of f_t has radius
#: ``SUPPORT_RADIUS / t``, which keeps the division amplification
#: ``exp(pi |xi|^2)`` below 1e11 for t >= 1/8.
SUPPORT_RADIUS = 1 / (2 * math.sqrt(2))

#: Fraction of the support on which the profile is identically one.
PLATEAU = 0.65

Function = Union[Symbol, GridFunction]


def _flat(x: np.ndarray) -> np.ndarray:
    # exp(-1/x) for x > 0 and 0 otherwise; every derivative vanishes at 0.
    out = np.zeros_like(x)
    positive = x > 0
    out[positive] = np.exp(-1 / x[positive])
    return out


def bump(s: np.ndarray, plateau: float = PLATEAU) -> np.ndarray:
    """Smooth radial profile, 1 on ``s <= plateau`` and 0 on ``s >= 1``.

    Across the band the profile is ``g(1 - u) / (g(1 - u) + g(u))`` with
    ``g(x) = exp(-1/x)``, which is infinitely differentiable at both ends,
    so f_t decays faster than any power of |z|.
    """
    s = np.asarray(s, dtype=float)
    u = np.clip((s - plateau) / (1 - plateau), 0.0, 1.0)
    falling, rising = _flat(1 - u), _flat(u)
    return falling / (falling + rising)


@dataclass(frozen=True)
class BandLimitedFamily:
    """The dilations f_t of a radial function whose spectrum is a fixed
    smooth bump.

    ``f_t(z) = t^{-2n} f_1(z / t)``, so the spectrum of f_t is supported in
    ``|xi| <= SUPPORT_RADIUS / t`` and equals 1 at the origin.
    """
    grid: SpectralGrid
    plateau: float = PLATEAU
    base_radius: float = SUPPORT_RADIUS
    version: str = PROFILE_VERSION

    def support_radius(self, t: float) -> float:
        return self.base_radius / t

    def profile(self, t: float) -> Callable:
        """The spectrum of f_t as a function of frequency points."""
        radius = self.support_radius(t)
        plateau = self.plateau

        def spectrum(xi):
            xi = np.asarray(xi, dtype=complex).reshape(len(xi), -1)
            return bump(np.linalg.norm(xi, axis=1) / radius, plateau) + 0j

        return spectrum

    def member(self, t: float) -> GridFunction:
        """f_t on the family's grid.

        :raises InvalidParameterError: `t` is not positive, or the support
                                       of the spectrum reaches the Nyquist
                                       frequency of the grid.
        """
        if not t > 0:
            raise InvalidParameterError(
                f'Approximate identity scale must be positive, got {t!r}.'
            )
        if self.support_radius(t) >= self.grid.nyquist:
            raise InvalidParameterError(
                f't={t:g} needs spectral support {self.support_radius(t):.3g}'
                f' but {self.grid!r} resolves only up to'
                f' {self.grid.nyquist:.3g}.'
            )
        profile = self.profile(t)
        spectrum = profile(self.grid.frequencies()).reshape(self.grid.shape)
        return GridFunction(
            self.grid,
            spectrum=spectrum,
            name=f'f_t({t:g})',
            profile=profile
        )

    def to_dict(self) -> Dict:
        return {
            'profile': self.version,
            'plateau': self.plateau,
            'base_radius': self.base_radius,
            'grid': self.grid.to_dict()
        }


def approx_identity(t: float, grid: SpectralGrid = None, *,
                    family: BandLimitedFamily = None) -> GridFunction:
    """The member f_t of the band-limited approximate identity.

    >>> f = approx_identity(0.5, SpectralGrid(1, 6.0, 64))
    >>> round(f.integral().real, 12)
    1.0
    """
    if family is None:
        family = BandLimitedFamily(grid or SpectralGrid())
    return family.member(t)


def _gaussian_spectrum(psi: Symbol) -> Callable:
    scale = psi.params['scale']
    amplitude = psi.params['amplitude']
    center = psi.params['center']

    def spectrum(xi):
        xi = np.asarray(xi, dtype=complex).reshape(len(xi), -1)
        r2 = np.sum(np.abs(xi) ** 2, axis=1)
        out = amplitude * scale ** (2 * xi.shape[1]) * \
            np.exp(-np.pi * scale ** 2 * r2)
        if center.size:
            out = out * np.exp(-2j * np.pi * np.real(xi @ center.conj()))
        return out

    return spectrum


def _profile_of(psi: Function):
    if isinstance(psi, GridFunction):
        return psi.profile
    if psi.kind == 'gaussian':
        return _gaussian_spectrum(psi)
    return None


def _embed(spectrum: np.ndarray, grid: SpectralGrid,
           fine: SpectralGrid) -> np.ndarray:
    q = np.round(grid.freq_axis / grid.freq_step).astype(int) % fine.M
    out = np.zeros(fine.shape, dtype=complex)
    out[np.ix_(*(q,) * grid.dims)] = spectrum
    return out


def spectrum_of(psi: Function, grid: SpectralGrid) -> np.ndarray:
    """The spectrum of `psi` on the frequencies of `grid`.

    Closed forms are used where known: Gaussians, and grid functions built
    from a spectral profile. Other symbols are sampled and transformed.
    """
    profile = _profile_of(psi)
    if profile is not None:
        return profile(grid.frequencies()).reshape(grid.shape)
    if isinstance(psi, GridFunction):
        if psi.grid == grid:
            return psi.spectrum
        if psi.grid.R == grid.R and grid.M >= psi.grid.M:
            return _embed(psi.spectrum, psi.grid, grid)
        raise InvalidParameterError(
            f'Cannot transfer {psi!r} to {grid!r}.'
        )
    return fft_forward(grid, psi.sample(grid.points(), warn_unbounded=False))


def wiener_divide(f: Function, psi: Function, grid: SpectralGrid = None, *,
                  threshold: float = 1e-12) -> GridFunction:
    """Solve ``f = psi * h`` for h with ``h^ = f^ / psi^`` on the support of
    f^ and zero elsewhere.

    :param threshold: Smallest admissible |psi^| on the support of f^.
                      [default: 1e-12]
    :raises DivisionError: |psi^| drops below `threshold` on the support of
                           f^. The error carries the location and value of
                           the minimum.
    :raises InvalidParameterError: f^ is not compactly supported inside the
                                   grid.
    """
    if grid is None:
        if not isinstance(f, GridFunction):
            raise InvalidParameterError(
                'wiener_divide() needs a grid when f is a symbol.'
            )
        grid = f.grid

    f_hat = spectrum_of(f, grid)
    psi_hat = spectrum_of(psi, grid)
    support = f_hat != 0

    if any(np.take(support, grid.M // 2, axis=axis).any()
           for axis in range(grid.dims)):
        raise InvalidParameterError(
            f'The spectrum of {f!r} reaches the Nyquist frequency of'
            f' {grid!r}; it is not compactly supported inside the grid.'
        )

    magnitude = np.where(support, np.abs(psi_hat), np.inf)
    i = np.unravel_index(np.argmin(magnitude), grid.shape)
    minimum = float(magnitude[i])
    if support.any() and not minimum > threshold:
        location = tuple(
            complex(v) for v in
            grid.frequencies()[np.ravel_multi_index(i, grid.shape)]
        )
        raise DivisionError(
            f'|psi^| = {minimum:.3e} at xi={location} on the support of'
            f' f^, below the threshold {threshold:g}.',
            location=location,
            minimum=minimum
        )

    h_hat = np.zeros(grid.shape, dtype=complex)
    h_hat[support] = f_hat[support] / psi_hat[support]

    f_profile, psi_profile = _profile_of(f), _profile_of(psi)
    profile = None
    if f_profile is not None and psi_profile is not None:
        def profile(xi):
            top = f_profile(xi)
            out = np.zeros(len(top), dtype=complex)
            nonzero = top != 0
            out[nonzero] = top[nonzero] / psi_profile(xi[nonzero])
            return out

    log.debug('wiener_divide on %r: min |psi^| = %.3e over %d frequencies',
              grid, minimum, int(support.sum()))
    return GridFunction(
        grid,
        spectrum=h_hat,
        name=f'{getattr(f, "name", "f")}/{getattr(psi, "name", "psi")}',
        profile=profile
    )


def division_residual(f: Function, psi: Function, h: GridFunction, *,
                      factor: int = 2) -> float:
    """``max |psi * h - f|`` recomputed on a grid `factor` times finer than
    the grid of `h`."""
    fine = h.grid.refined(factor)
    residual = spectrum_of(psi, fine) * _embed(h.spectrum, h.grid, fine) - \
        spectrum_of(f, fine)
    return float(np.max(np.abs(fft_inverse(fine, residual))))


def _continuous_inverse(profile: Callable, radius: float,
                        points: np.ndarray, *, nodes: int = 256,
                        angles: int = 256) -> np.ndarray:
    # Polar quadrature of the inverse transform on C^1.
    rho, w = roots_legendre(nodes)
    rho = radius * (rho + 1) / 2
    w = w * radius / 2
    phi = 2 * np.pi * np.arange(angles) / angles
    xi = (rho[:, None] * np.exp(1j * phi)[None, :]).reshape(-1)
    weights = (w * rho)[:, None] * np.full(angles, 2 * np.pi / angles)
    coeffs = weights.reshape(-1) * profile(xi[:, None])
    phase = np.real(points[:, :1] @ xi[None, :].conj())
    return np.exp(2j * np.pi * phase) @ coeffs


def angular_variation(g: GridFunction, radii: Sequence[float] = (0.5, 1, 1.5),
                      *, samples: int = 32) -> float:
    """Largest variation of `g` over circles about the origin, relative to
    the largest value seen.

    On C^1, functions with a known spectral profile are evaluated from the
    continuous inverse transform, since the grid's periodic images break
    rotation symmetry. Otherwise the grid interpolant is used.
    """
    n = g.grid.n
    theta = 2 * np.pi * (np.arange(samples) + 0.37) / samples
    if n == 1:
        directions = np.exp(1j * theta)[:, None]
    else:
        # Rotate through every coordinate plane in turn.
        directions = np.zeros((samples, n), dtype=complex)
        for i, angle in enumerate(theta):
            j = i % n
            directions[i, j] = np.cos(angle)
            directions[i, (j + 1) % n] = 1j * np.sin(angle)

    worst, peak = 0.0, 0.0
    for r in radii:
        points = r * directions
        if n == 1 and g.profile is not None:
            support = np.abs(g.spectrum.reshape(-1)) > 0
            radius = g.grid.freq_step + float(np.max(
                np.linalg.norm(g.grid.frequencies()[support], axis=1),
                initial=0.0
            ))
            values = _continuous_inverse(g.profile, radius, points)
        else:
            values = g(points)
        worst = max(worst, float(np.max(np.abs(values - values[0]))))
        peak = max(peak, float(np.max(np.abs(values))))
    return worst / peak if peak > 0 else 0.0


def _validate_schedule(t_schedule: Sequence[float]) -> List[float]:
    schedule = [float(t) for t in t_schedule]
    if not schedule:
        raise InvalidParameterError('The t schedule is empty.')
    if any(not t > 0 for t in schedule):
        raise InvalidParameterError(
            f'Every t must be positive, got {schedule}.'
        )
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise InvalidParameterError(
            f'The t schedule must be strictly decreasing, got {schedule}.'
        )
    return schedule


def _column_errors(D: np.ndarray, test_vectors: int) -> List[float]:
    return [float(np.linalg.norm(D[:, j])) for j in range(test_vectors)]


@dataclass
class PipelineStage:
    """The Toeplitz approximant of an operator at one scale t."""
    t: float
    #: The symbol a_t = h_t * B(S).
    symbol: GridFunction
    #: T_{a_t}.
    operator: OperatorMatrix
    #: Leading-block norm of ``T_{a_t} - f_t * S``.
    identity_error: float
    diagnostics: List[str] = field(default_factory=list)


@dataclass
class SotApproximation:
    stages: List[PipelineStage]
    table: ErrorTable
    family: BandLimitedFamily


def sot_toeplitz_approximation(space: TruncatedSpace, S: OperatorMatrix,
                               t_schedule: Sequence[float], *,
                               grid: SpectralGrid = None,
                               test_vectors: int = 5,
                               family: BandLimitedFamily = None
                               ) -> SotApproximation:
    """Approximate `S` by Toeplitz operators T_{a_t} along `t_schedule`.

    Each stage also computes f_t * S by direct translation sums and records
    its distance to T_{a_t}, which should vanish up to quadrature error.
    The table holds ``||(T_{a_t} - S) e_j||`` for the first `test_vectors`
    basis vectors.
    """
    schedule = _validate_schedule(t_schedule)
    family = family or BandLimitedFamily(grid or SpectralGrid(space.n))
    grid = family.grid
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always')
        berezin_hat = fft_forward(grid, berezin(space, S)(grid.points()))
    base_diagnostics = [str(w.message) for w in caught]
    for message in base_diagnostics:
        log.warning('sot_toeplitz_approximation: %s', message)

    table = ErrorTable(name='sot', parameter='t')
    stages = []
    size = space.leading_dim()
    for t in schedule:
        log.info('Toeplitz approximation at t=%g on %r', t, space)
        f_t = family.member(t)
        h_t = wiener_divide(f_t, phi(), grid)
        a_t = GridFunction(
            grid,
            spectrum=h_t.spectrum * berezin_hat,
            name=f'a_t({t:g})'
        )

        radius = family.support_radius(t)
        order = space.quadrature.order + \
            3 * math.ceil(2 * math.sqrt(math.pi) * radius)
        T = toeplitz(space, a_t.to_symbol(), order=order)

        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always')
            reference = conv_fo(f_t, S)
        diagnostics = base_diagnostics + [str(w.message) for w in caught]

        identity_error = float(
            np.linalg.norm((T - reference).block(size), ord=2)
        )
        for j, error in enumerate(
                _column_errors((T - S).entries, test_vectors)):
            table.add(t, j, error)

        stages.append(PipelineStage(
            t=t,
            symbol=a_t,
            operator=T,
            identity_error=identity_error,
            diagnostics=diagnostics
        ))
    return SotApproximation(stages=stages, table=table, family=family)


def approx_identity_sot_check(S: OperatorMatrix,
                              t_schedule: Sequence[float], *,
                              test_vectors: int = 5,
                              grid: SpectralGrid = None,
                              family: BandLimitedFamily = None
                              ) -> ErrorTable:
    """Table of ``||(f_t * S - S) e_j||`` along `t_schedule`."""
    schedule = _validate_schedule(t_schedule)
    family = family or BandLimitedFamily(grid or SpectralGrid(S.space.n))
    table = ErrorTable(name='approx_identity', parameter='t')
    for t in schedule:
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            F = conv_fo(family.member(t), S)
        for j, error in enumerate(
                _column_errors((F - S).entries, test_vectors)):
            table.add(t, j, error)
    return table
