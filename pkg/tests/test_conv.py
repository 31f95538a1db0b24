import numpy as np
import pytest

from qhalab.conv import (
    ConvQuadrature,
    conv_ff,
    conv_fo,
    conv_oo,
    conv_symbol_op,
    default_quadrature,
    is_regular_function,
    is_regular_operator
)
from qhalab.errors import InvalidParameterError, QuadratureError
from qhalab.grid import GridFunction
from qhalab.operators import (
    OperatorMatrix,
    berezin,
    identity,
    matrix_unit,
    op_norm_estimate,
    phi_op,
    toeplitz
)
from qhalab.symbols import (
    constant,
    dilated_gaussian,
    from_name,
    gaussian,
    phi
)
from qhalab.wiener import approx_identity


def test_quadrature_rules(grid):
    """Ensure the convolution quadratures carry Lebesgue weights."""
    box = ConvQuadrature.uniform(1, R=3.0, resolution=25)
    assert len(box) == 25 ** 2
    assert np.sum(box.weights) == pytest.approx(36.0)

    gauss = ConvQuadrature.hermite(1)
    assert np.sum(gauss.weigh(phi())) == pytest.approx(1.0)

    wide = ConvQuadrature.hermite(1, scale=2.0, center=[0.5j])
    shifted = gaussian(2.0, amplitude=0.25, center=[0.5j])
    assert np.sum(wide.weigh(shifted)) == pytest.approx(1.0)

    assert np.sum(ConvQuadrature.from_grid(grid).weights) == \
        pytest.approx(144.0)

    with pytest.raises(InvalidParameterError):
        ConvQuadrature.uniform(1, resolution=1)
    with pytest.raises(InvalidParameterError):
        ConvQuadrature.from_grid(grid, stride=3)


def test_default_quadrature(grid):
    """Ensure the rule is chosen from the weight function."""
    assert default_quadrature(phi(), 1).kind == 'hermite'
    assert default_quadrature(constant(1.0), 1).kind == 'uniform'
    f = GridFunction.from_symbol(grid, phi())
    assert default_quadrature(f, 1).kind == 'grid'


def test_conv_ff(grid):
    """Ensure phi * phi = exp(-pi |z|^2 / 2) / 2."""
    result = conv_ff(phi(), phi(), grid)
    z = grid.points()[:, 0]
    expected = np.exp(-np.pi * np.abs(z) ** 2 / 2) / 2
    assert np.allclose(result.values.reshape(-1), expected, atol=1e-10)
    assert result.sup() <= 1 + 1e-10


def test_toeplitz_as_convolution(fock):
    """Ensure a * Phi = T_a."""
    for name in ('phi', 'shifted_gaussian', 'plane_wave'):
        a = from_name(name)
        difference = conv_symbol_op(a, phi_op(fock)) - toeplitz(fock, a)
        assert op_norm_estimate(difference.block()) < 1e-8

    assert np.allclose(
        conv_symbol_op(constant(1.0), phi_op(fock)).entries,
        np.eye(fock.dim),
        atol=1e-10
    )


def test_operator_convolutions(fock, rng):
    """Ensure Phi * Phi = phi and Phi * S = B(S)."""
    z = np.array([[0.0], [0.3 - 0.4j], [1.2j], [-2.0]])
    Phi = phi_op(fock)
    assert np.allclose(conv_oo(Phi, Phi)(z),
                       np.exp(-np.pi * np.abs(z[:, 0]) ** 2), atol=1e-14)

    S = OperatorMatrix(
        fock,
        rng.standard_normal((fock.dim,) * 2) +
        1j * rng.standard_normal((fock.dim,) * 2)
    )
    assert np.allclose(conv_oo(Phi, S)(z), berezin(fock, S)(z), atol=1e-12)


def test_gaussian_conv_is_toeplitz(fock):
    """Ensure phi * S = T_{B(S)} on the leading block."""
    for S in (matrix_unit(fock, 0, 1), matrix_unit(fock, 2, 2)):
        difference = conv_fo(phi(), S) - toeplitz(fock, berezin(fock, S))
        assert op_norm_estimate(difference.block()) < 1e-6


def test_approximate_identity(fock):
    """Ensure psi_t * S approaches S as t shrinks."""
    S = matrix_unit(fock, 0, 1)
    errors = [
        op_norm_estimate((conv_fo(dilated_gaussian(t), S) - S).block())
        for t in (1.0, 0.5, 0.25)
    ]
    assert errors[0] > errors[1] > errors[2]


def test_convolution_with_identity(fock):
    """Ensure psi * I = (integral psi) I and I * Phi = 1."""
    # Integral 48 * 0.25^2 = 3.
    psi = gaussian(0.25, amplitude=48.0)
    result = conv_fo(psi, identity(fock))
    size = fock.leading_dim()
    assert np.allclose(result.block(), 3.0 * np.eye(size), atol=1e-5)

    # The Poisson tail beyond degree 16 is below 1e-7 for |z| <= 1.
    z = np.array([[0.0], [0.3 - 0.4j], [0.8j], [-1.0]])
    assert np.allclose(conv_oo(identity(fock), phi_op(fock))(z), 1.0,
                       atol=1e-6)


def test_conv_errors(fock, fock_small, bergman):
    """Ensure convolutions refuse what they cannot compute."""
    with pytest.raises(QuadratureError):
        conv_fo(constant(1.0), matrix_unit(fock_small, 0, 1))
    with pytest.raises(InvalidParameterError):
        conv_fo(phi(), identity(bergman))
    with pytest.raises(InvalidParameterError):
        conv_oo(phi_op(fock), phi_op(fock_small))


def test_regularity(grid, fock):
    """Ensure regularity is decided from the spectrum."""
    report = is_regular_function(phi(), grid, radius=2.0)
    assert report
    assert np.exp(-np.pi * 4.1) < report.minimum < np.exp(-np.pi * 3.8)

    bump = approx_identity(1.0, grid)
    report = is_regular_function(bump, grid)
    assert not report
    assert report.minimum < 1e-12
    assert report.to_dict()['regular'] is False

    # Unit masses cancel, so the spectrum vanishes at the origin.
    psi = phi() - dilated_gaussian(0.8)
    report = is_regular_function(psi, grid, radius=1.0)
    assert not report
    assert report.minimum < 1e-12
    assert abs(report.location[0]) < 1e-12

    assert is_regular_operator(phi_op(fock), grid, radius=1.5)
