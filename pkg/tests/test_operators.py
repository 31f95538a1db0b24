import numpy as np
import pytest

from qhalab.errors import (
    InvalidParameterError,
    TruncationWarning,
    UnboundedSymbolWarning
)
from qhalab.operators import (
    OperatorMatrix,
    berezin,
    berezin_symbol,
    block_norm,
    diagonal,
    identity,
    matrix_unit,
    op_norm_estimate,
    parity,
    phi_op,
    toeplitz,
    trace,
    trace_norm,
    translate_op,
    weyl,
    weyl_batch,
    weyl_closed_form,
    weyl_tail
)
from qhalab.space import TruncatedSpace, normalized_kernel_coeffs
from qhalab.symbols import Symbol, abs_squared, constant, from_name, phi


def test_operator_matrix(fock_small):
    """Ensure operator matrices validate and combine."""
    with pytest.raises(InvalidParameterError):
        OperatorMatrix(fock_small, np.eye(3))
    with pytest.raises(InvalidParameterError):
        OperatorMatrix(fock_small, np.full((9, 9), np.nan))

    A = matrix_unit(fock_small, 0, 1)
    B = matrix_unit(fock_small, 1, 0)
    assert (A @ B) == matrix_unit(fock_small, 0, 0)
    assert (A + B).entries[1, 0] == 1
    assert (2 * A - A) == A
    assert A.adjoint == B
    assert -A == A * -1

    with pytest.raises(ValueError):
        A.entries[0, 0] = 5

    with pytest.raises(InvalidParameterError):
        A + matrix_unit(TruncatedSpace(1, 4), 0, 1)


def test_serialization(fock2):
    """Ensure the JSON envelope restores the operator."""
    rng = np.random.default_rng(3)
    S = OperatorMatrix(
        fock2,
        rng.standard_normal((fock2.dim,) * 2) +
        1j * rng.standard_normal((fock2.dim,) * 2)
    )
    data = S.to_dict()
    assert data['dim'] == fock2.dim
    assert len(data['entries']) == fock2.dim ** 2
    assert OperatorMatrix.from_dict(data) == S

    with pytest.raises(InvalidParameterError):
        OperatorMatrix.from_dict(data, space=TruncatedSpace(2, 3))


def test_toeplitz_of_constant(fock, bergman):
    """Ensure T_1 is the identity."""
    for space in (fock, bergman):
        T = toeplitz(space, constant(1.0))
        assert np.allclose(T.entries, np.eye(space.dim), atol=1e-10)


def test_toeplitz_abs_squared(fock, bergman):
    """Ensure the diagonal of T_{|z|^2} on both spaces."""
    k = np.arange(fock.dim)
    with pytest.warns(UnboundedSymbolWarning):
        T = toeplitz(fock, abs_squared())
    assert np.allclose(T.entries, np.diag((k + 1) / np.pi), atol=1e-9)

    k = np.arange(bergman.dim)
    with pytest.warns(UnboundedSymbolWarning):
        T = toeplitz(bergman, abs_squared())
    assert np.allclose(T.entries, np.diag((k + 1) / (k + 2)), atol=1e-10)


@pytest.mark.parametrize('name', [
    'phi', 'gaussian_half', 'shifted_gaussian', 'radial_bump'
])
def test_toeplitz_positive(fock, name):
    """Ensure positive real symbols give positive self-adjoint matrices."""
    T = toeplitz(fock, from_name(name))
    assert np.array_equal(T.entries, T.entries.conj().T)
    assert np.linalg.eigvalsh(T.entries)[0] > -1e-10
    if from_name(name).is_radial:
        off_diagonal = T.entries - np.diag(np.diag(T.entries))
        assert np.linalg.norm(off_diagonal) <= 1e-12


@pytest.mark.parametrize('name', ['phi', 'gaussian_half', 'radial_bump'])
def test_toeplitz_radial_diagonal(fock, fock2, bergman, name):
    """Ensure radial symbols give diagonal matrices from the quadrature
    alone."""
    for space in (fock, fock2, bergman):
        a = from_name(name, space.n)
        T = toeplitz(space, a)
        off_diagonal = T.entries - np.diag(np.diag(T.entries))
        assert np.linalg.norm(off_diagonal) <= 1e-12

    # A symbol with no metadata but the same values behaves the same way.
    bump = from_name('radial_bump')
    unlabelled = Symbol(bump.evaluator, sup_bound=1.0)
    assert not unlabelled.is_radial
    T = toeplitz(fock, unlabelled)
    assert np.linalg.norm(T.entries - np.diag(np.diag(T.entries))) <= 1e-12
    assert np.allclose(T.entries, toeplitz(fock, bump).entries, atol=1e-14)


def test_weyl_methods_agree(fock_small, fock2):
    """Ensure the Laguerre closed form matches quadrature."""
    for space, z in ((fock_small, [[0.3 + 0.2j]]),
                     (fock2, [[0.2 - 0.1j, 0.4j]])):
        closed = weyl_batch(space, z, method='laguerre')
        quadrature = weyl_batch(space, z, method='quadrature')
        assert np.allclose(closed, quadrature, atol=1e-9)

    with pytest.raises(InvalidParameterError):
        weyl_batch(fock_small, [[0.1]], method='taylor')


def test_weyl_vacuum(fock):
    """Ensure W_z maps the vacuum to the normalised kernel k_z."""
    z = np.array([[0.4 - 0.3j], [1.0j]])
    W = weyl_batch(fock, z)
    assert np.allclose(W[:, :, 0], normalized_kernel_coeffs(fock, z),
                       atol=1e-14)
    assert np.allclose(weyl_closed_form(fock, 0.0).entries, np.eye(fock.dim))


def test_weyl_unitary_on_leading_block(fock):
    """Ensure W_z W_z^* = I on the leading block up to the tail."""
    W = weyl_batch(fock, [[0.5 + 0.2j]])[0]
    size = fock.leading_dim()
    deviation = np.max(np.abs((W @ W.conj().T - np.eye(fock.dim))[
        :size, :size
    ]))
    assert deviation <= weyl_tail(fock, W) + 1e-12


def test_weyl_truncation_warning(fock_small):
    """Ensure far translations warn about leaking out of the truncation."""
    with pytest.warns(TruncationWarning):
        W = weyl(fock_small, 3.0)
    assert W.diagnostics


def test_translate_phi(fock):
    """Ensure alpha_z(Phi) is the projection onto k_z."""
    z = 0.3 + 0.1j
    k = normalized_kernel_coeffs(fock, z)
    moved = translate_op(fock, z, phi_op(fock), method='laguerre')
    assert np.allclose(moved.entries, np.outer(k, k.conj()), atol=1e-12)


def test_berezin(fock):
    """Ensure Berezin transforms of simple operators."""
    z = np.array([[0.0], [0.5], [0.3 - 0.6j]])
    r2 = np.abs(z[:, 0]) ** 2
    assert np.allclose(berezin(fock, phi_op(fock))(z), np.exp(-np.pi * r2))
    assert np.allclose(berezin(fock, identity(fock))(z), 1, atol=1e-12)
    assert berezin(fock, phi_op(fock)).sup_bound == pytest.approx(1.0)


def test_berezin_of_phi(fock):
    """Ensure B(T_phi) = phi * phi = exp(-pi |z|^2 / 2) / 2."""
    z = np.array([[0.0], [0.5j], [0.4 + 0.4j], [-0.7]])
    expected = np.exp(-np.pi * np.abs(z[:, 0]) ** 2 / 2) / 2
    assert np.allclose(berezin_symbol(fock, phi())(z), expected, atol=1e-8)


def test_berezin_requires_fock(bergman):
    """Ensure Fock-only constructions refuse the Bergman space."""
    with pytest.raises(InvalidParameterError):
        phi_op(bergman)
    with pytest.raises(InvalidParameterError):
        berezin(bergman, identity(bergman))
    with pytest.raises(InvalidParameterError):
        weyl_batch(bergman, [[0.1]])


def test_norms(fock):
    """Ensure norm and trace helpers."""
    assert op_norm_estimate(identity(fock)) == pytest.approx(1.0)
    assert trace(identity(fock)) == pytest.approx(fock.dim)
    assert trace_norm(matrix_unit(fock, 0, 3)) == pytest.approx(1.0)
    assert trace_norm(diagonal(fock, np.arange(fock.dim))) == \
        pytest.approx(fock.dim * (fock.dim - 1) / 2)
    assert block_norm(matrix_unit(fock, 12, 12)) == 0
    assert block_norm(matrix_unit(fock, 2, 2)) == pytest.approx(1.0)


def test_parity(fock2):
    """Ensure the parity operator is a self-inverse sign."""
    U = parity(fock2)
    assert U @ U == identity(fock2)
    assert np.allclose(np.diag(U.entries), (-1.0) ** fock2.degrees)
