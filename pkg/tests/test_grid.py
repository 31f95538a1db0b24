import numpy as np
import pytest

from qhalab import dumps, loads
from qhalab.errors import AliasingWarning, InvalidParameterError
from qhalab.grid import GridFunction, SpectralGrid, fft_forward, fft_inverse
from qhalab.symbols import phi


def test_invalid_grid():
    """Ensure malformed grids are refused."""
    with pytest.raises(InvalidParameterError):
        SpectralGrid(1, 6.0, 100)
    with pytest.raises(InvalidParameterError):
        SpectralGrid(1, 0.0, 64)
    with pytest.raises(InvalidParameterError):
        SpectralGrid(0, 6.0, 64)


def test_grid_geometry(grid):
    """Ensure steps and the Nyquist frequency follow from R and M."""
    assert grid.step == pytest.approx(12 / 64)
    assert grid.freq_step == pytest.approx(1 / 12)
    assert grid.nyquist == pytest.approx(64 / 24)
    assert grid.points().shape == (64 ** 2, 1)
    assert grid.refined() == SpectralGrid(1, 6.0, 128)
    assert grid.to_dict() == {'n': 1, 'box_radius': 6.0, 'resolution': 64}


def test_gaussian_is_self_dual(grid):
    """Ensure the transform of phi is phi."""
    values = phi()(grid.points())
    spectrum = fft_forward(grid, values).reshape(-1)
    xi = grid.frequencies()[:, 0]
    assert np.allclose(spectrum, np.exp(-np.pi * np.abs(xi) ** 2), atol=1e-8)
    assert np.allclose(fft_inverse(grid, spectrum).reshape(-1), values,
                       atol=1e-12)


def test_aliasing_warning(grid):
    """Ensure a spectrum reaching the Nyquist frequency is flagged."""
    noise = np.random.default_rng(0).standard_normal(grid.M ** 2)
    with pytest.warns(AliasingWarning):
        fft_forward(grid, noise)


def test_grid_function(grid):
    """Ensure grid functions integrate, interpolate and convert."""
    f = GridFunction.from_symbol(grid, phi())
    assert f.integral() == pytest.approx(1.0, abs=1e-10)
    assert f.l1_norm() == pytest.approx(1.0, abs=1e-10)
    assert f.sup() == pytest.approx(1.0)

    z = np.array([[0.1 + 0.2j], [-0.77 + 0.05j]])
    assert np.allclose(f(z), phi()(z), atol=1e-8)
    assert f(0.1 + 0.2j) == pytest.approx(phi()(0.1 + 0.2j), abs=1e-8)

    a = f.to_symbol()
    assert a.kind == 'grid-sampled'
    assert a.sup_bound == pytest.approx(1.0)
    assert a(0.0) == pytest.approx(1.0, abs=1e-8)

    with pytest.raises(InvalidParameterError):
        GridFunction(grid)


def test_spectrum_only(grid):
    """Ensure a function given by its spectrum derives its samples."""
    xi = grid.frequencies()[:, 0]
    f = GridFunction(grid, spectrum=np.exp(-np.pi * np.abs(xi) ** 2))
    assert np.allclose(f.values.reshape(-1), phi()(grid.points()),
                       atol=1e-8)


def test_serialization(grid):
    """Ensure grid functions survive their JSON envelope."""
    f = GridFunction.from_symbol(grid, phi())
    g = loads(dumps(f))
    assert isinstance(g, GridFunction)
    assert g.grid == grid
    assert np.array_equal(g.values, f.values)
