import numpy as np
import pytest

from qhalab.errors import DivisionError, InvalidParameterError
from qhalab.grid import GridFunction, SpectralGrid
from qhalab.operators import matrix_unit, phi_op, toeplitz
from qhalab.symbols import from_name, phi, plane_wave
from qhalab.wiener import (
    PLATEAU,
    PROFILE_VERSION,
    SUPPORT_RADIUS,
    BandLimitedFamily,
    angular_variation,
    approx_identity,
    approx_identity_sot_check,
    bump,
    division_residual,
    sot_toeplitz_approximation,
    spectrum_of,
    wiener_divide
)


@pytest.fixture(scope='module')
def fine_grid():
    return SpectralGrid(1, 6.0, 128)


def test_bump():
    """Ensure the profile is one on the plateau and vanishes outside."""
    values = bump(np.array([0.0, 0.5, PLATEAU, 0.8, 1.0, 1.5]))
    assert values[:3].tolist() == [1.0, 1.0, 1.0]
    assert 0 < values[3] < 1
    assert values[4:].tolist() == [0.0, 0.0]

    # Symmetric about the middle of the band.
    middle = (1 + PLATEAU) / 2
    offsets = np.array([0.01, 0.05, 0.1])
    assert np.allclose(bump(middle - offsets) + bump(middle + offsets), 1.0)
    assert bump(middle) == pytest.approx(0.5)


def test_bump_is_smooth():
    """Ensure the profile has no kink where the band meets the plateau or
    the support edge."""
    h = 1e-3
    for edge in (PLATEAU, 1.0):
        s = edge + h * np.arange(-3, 4)
        values = bump(s)
        first = np.diff(values) / h
        second = np.diff(values, 2) / h ** 2
        # exp(-1/x) and all its derivatives vanish as x -> 0.
        assert np.max(np.abs(first)) < 1e-3
        assert np.max(np.abs(second)) < 1e-3

    s = np.linspace(PLATEAU, 1.0, 2001)
    assert np.all(np.diff(bump(s)) <= 1e-15)


def test_family(grid):
    """Ensure members are unit-mass and band-limited."""
    family = BandLimitedFamily(grid)
    assert family.version == PROFILE_VERSION
    assert family.support_radius(0.5) == pytest.approx(2 * SUPPORT_RADIUS)

    f = approx_identity(0.5, grid)
    assert f.integral() == pytest.approx(1.0, abs=1e-12)
    xi = np.abs(grid.frequencies()[:, 0])
    assert not np.any(f.spectrum.reshape(-1)[xi > 2 * SUPPORT_RADIUS])

    with pytest.raises(InvalidParameterError):
        family.member(0.0)
    with pytest.raises(InvalidParameterError):
        # Support radius 2.83 exceeds the Nyquist frequency 2.67.
        family.member(1 / 8)


def test_spectrum_of(grid):
    """Ensure closed-form spectra agree with sampled ones."""
    exact = spectrum_of(phi(), grid)
    sampled = spectrum_of(GridFunction.from_symbol(grid, phi()), grid)
    assert np.allclose(exact, sampled, atol=1e-8)


@pytest.mark.parametrize('t', [1.0, 0.5, 0.25])
def test_wiener_divide(fine_grid, t):
    """Ensure phi * h_t = f_t and h_t is radial."""
    f = approx_identity(t, fine_grid)
    h = wiener_divide(f, phi())
    assert division_residual(f, phi(), h) < 1e-8
    assert angular_variation(h) < 1e-8


def test_wiener_divide_errors(grid):
    """Ensure division refuses small divisors and unbounded spectra."""
    f = approx_identity(1.0, grid)
    with pytest.raises(DivisionError) as e:
        wiener_divide(f, phi(), threshold=1.0)
    assert e.value.minimum < 1.0
    assert len(e.value.location) == 1

    with pytest.raises(InvalidParameterError):
        wiener_divide(phi(), phi(), grid)
    with pytest.raises(InvalidParameterError):
        wiener_divide(phi(), phi())


def test_angular_variation(grid):
    """Ensure non-radial functions show angular variation."""
    g = GridFunction.from_symbol(grid, from_name('shifted_gaussian'))
    assert angular_variation(g) > 0.1


def test_sot_approximation(fock, fine_grid):
    """Ensure Toeplitz approximants of Phi converge along the schedule."""
    result = sot_toeplitz_approximation(
        fock, phi_op(fock), [1.0, 0.25], grid=fine_grid, test_vectors=3
    )
    assert [stage.t for stage in result.stages] == [1.0, 0.25]
    assert result.table.final < result.table.first
    assert result.table.improves()
    for stage in result.stages:
        assert stage.identity_error < 1e-5
        assert stage.operator.space == fock


@pytest.mark.parametrize('label', ['e01', 'plane_wave'])
def test_sot_approximation_per_vector(fock, fine_grid, label):
    """Ensure every test vector improves from the first to the last t."""
    if label == 'e01':
        S = matrix_unit(fock, 0, 1)
    else:
        S = toeplitz(fock, plane_wave([0.5]))
    table = sot_toeplitz_approximation(
        fock, S, [1.0, 0.125], grid=fine_grid
    ).table
    assert table.parameters == [1.0, 0.125]
    # E_01 annihilates e_0, so that column stays at rounding level.
    assert table.improves(floor=1e-12)
    first, final = table.errors(1.0), table.errors(0.125)
    assert all(b < a / 5 or b < 1e-12 for a, b in zip(first, final))
    if label == 'e01':
        assert table.final < 1e-3


def test_invalid_schedules(fock_small):
    """Ensure schedules must be non-empty, positive and decreasing."""
    S = phi_op(fock_small)
    for schedule in ([], [0.5, 1.0], [1.0, -1.0], [1.0, 1.0]):
        with pytest.raises(InvalidParameterError):
            sot_toeplitz_approximation(fock_small, S, schedule)


def test_approx_identity_sot(fock_small, fine_grid):
    """Ensure f_t * S approaches S."""
    table = approx_identity_sot_check(
        phi_op(fock_small), [1.0, 0.5, 0.25], test_vectors=2, grid=fine_grid
    )
    assert table.name == 'approx_identity'
    assert table.parameters == [1.0, 0.5, 0.25]
    assert table.improves()
