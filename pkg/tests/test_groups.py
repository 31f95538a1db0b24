import numpy as np
import pytest

from qhalab.errors import (
    InvalidParameterError,
    NonUnitaryError,
    UnboundedSymbolWarning
)
from qhalab.groups import (
    FiniteSet,
    FullUnitary,
    GroupElement,
    QuasiRadialBlocks,
    Torus,
    Translations,
    act_symbol,
    conv_g_op,
    conv_g_symbol,
    density_l1,
    density_values,
    haar_unitary,
    is_invariant,
    is_invariant_symbol,
    proj_rep,
    radialize,
    rotation_matrix,
    schur_average,
    sot_convergence_check,
    trigonometric_density
)
from qhalab.operators import (
    OperatorMatrix,
    matrix_unit,
    op_norm_estimate,
    phi_op,
    toeplitz
)
from qhalab.symbols import from_name, phi, random_polynomial


def _random_operator(space, rng):
    return OperatorMatrix(
        space,
        rng.standard_normal((space.dim,) * 2) +
        1j * rng.standard_normal((space.dim,) * 2)
    )


def test_group_elements(rng):
    """Ensure group elements validate, compose and invert."""
    with pytest.raises(NonUnitaryError):
        GroupElement([[2.0]])
    with pytest.raises(InvalidParameterError):
        GroupElement(np.eye(2), [1.0])

    g = GroupElement(haar_unitary(2, rng), [0.5, -1j])
    h = GroupElement.rotation([0.3, 1.1]) * GroupElement.translation([1, 2j])
    w = np.array([0.2 + 0.1j, -0.4j])

    assert np.allclose((g * h).act(w), g.act(h.act(w)))
    assert np.allclose((g * g.inverse()).act(w), w)
    assert np.allclose(GroupElement.identity(2).act(w), w)
    assert not g.is_rotation
    assert GroupElement.rotation([0.3, 1.1]).is_rotation


def test_haar_unitary(rng):
    """Ensure Haar samples are unitary."""
    for n in (1, 2, 3):
        A = haar_unitary(n, rng)
        assert np.allclose(A.conj().T @ A, np.eye(n), atol=1e-12)


def test_subgroups():
    """Ensure Haar quadratures are probability measures on compact groups."""
    elements, weights = Torus(1, 8).haar()
    assert len(elements) == 8
    assert np.sum(weights) == pytest.approx(1.0)

    assert Torus(2).partition() == (1, 1)
    assert FullUnitary(2, mc_samples=16).partition() == (2,)
    assert QuasiRadialBlocks((1, 2)).n == 3
    assert not Translations(1).COMPACT

    with pytest.raises(InvalidParameterError):
        QuasiRadialBlocks((0, 2))
    with pytest.raises(InvalidParameterError):
        FiniteSet([])

    finite = FiniteSet([GroupElement.identity(1)] * 2, weights=[1, 3])
    assert finite.haar()[1].tolist() == [0.25, 0.75]


def test_representation(fock2, rng):
    """Ensure rotations act unitarily and multiplicatively."""
    A = haar_unitary(2, rng)
    B = haar_unitary(2, rng)
    R = rotation_matrix(fock2, A)
    assert np.allclose(R.conj().T @ R, np.eye(fock2.dim), atol=1e-12)

    product = proj_rep(fock2, GroupElement(A) * GroupElement(B))
    assert np.allclose(
        product.entries,
        (proj_rep(fock2, GroupElement(A)) @ proj_rep(fock2, GroupElement(B)))
        .entries,
        atol=1e-12
    )


def test_rotated_monomial(fock2):
    """Ensure R_A f = f(A^{-1} .) on a monomial."""
    g = GroupElement.rotation([0.4, -1.3])
    R = rotation_matrix(fock2, g.A)
    w = np.array([[0.3 + 0.2j, -0.5 + 0.1j]])
    k = fock2.index((1, 2))
    moved = fock2.basis(w) @ R[:, k]
    expected = fock2.basis(g.inverse().act(w))[:, k]
    assert np.allclose(moved, expected, atol=1e-12)


def test_toeplitz_covariance(fock):
    """Ensure pi(g) T_a pi(g)^* = T_{a(g^{-1} .)} for rotations."""
    a = random_polynomial(1, 2, seed=3)
    g = GroupElement.rotation(0.7)
    P = proj_rep(fock, g)
    with pytest.warns(UnboundedSymbolWarning):
        T = toeplitz(fock, a)
        moved = toeplitz(fock, act_symbol(g, a))
    assert np.allclose((P @ T @ P.adjoint).entries, moved.entries, atol=1e-9)


def test_radialize(fock2, rng):
    """Ensure radialization is an idempotent contraction onto invariant
    operators."""
    S = _random_operator(fock2, rng)
    torus = Torus(2, angle_grid=8)

    R = radialize(fock2, S, torus)
    assert np.count_nonzero(R.entries - np.diag(np.diag(R.entries))) == 0
    assert radialize(fock2, R, torus) == R
    assert op_norm_estimate(R) <= op_norm_estimate(S) + 1e-12
    assert is_invariant(R, torus)
    assert not is_invariant(S, torus)

    quadrature = radialize(fock2, S, torus, method='quadrature')
    assert np.allclose(quadrature.entries, R.entries, atol=1e-12)

    with pytest.raises(InvalidParameterError):
        radialize(fock2, S, Translations(2))
    with pytest.raises(InvalidParameterError):
        radialize(fock2, S, torus, method='guess')


def test_full_unitary_average(fock2, rng):
    """Ensure the U(n) average is constant on each degree."""
    S = _random_operator(fock2, rng)
    R = radialize(fock2, S, FullUnitary(2))
    diag = np.diag(R.entries)
    for degree in range(fock2.N + 1):
        members = fock2.degrees == degree
        assert np.allclose(diag[members], np.mean(np.diag(S.entries)[members]))
    assert is_invariant(R, FullUnitary(2), samples=8)
    assert schur_average(fock2, S, (2,)) == R


def test_invariance(fock2):
    """Ensure invariance checks tell radial from non-radial input."""
    assert is_invariant(phi_op(fock2), FullUnitary(2), samples=8)
    report = is_invariant(matrix_unit(fock2, 0, 1), Torus(2), samples=8)
    assert not report
    assert report.deviation > 1e-3
    assert report.samples == 8 + 2

    assert is_invariant_symbol(phi(), FullUnitary(1))
    assert not is_invariant_symbol(from_name('shifted_gaussian'), Torus(1))


def test_group_convolutions(fock_small):
    """Ensure G-convolutions average over the group."""
    S = matrix_unit(fock_small, 1, 2)
    identity_only = FiniteSet([GroupElement.identity(1)])
    assert np.allclose(conv_g_op(None, S, identity_only).entries, S.entries)

    a = from_name('shifted_gaussian')
    averaged = conv_g_symbol(None, a, Torus(1))
    assert is_invariant_symbol(averaged, Torus(1))
    assert averaged.sup_bound == pytest.approx(1.0)


def test_densities():
    """Ensure trigonometric densities integrate over the torus."""
    G = Torus(1)
    psi = trigonometric_density({(0,): 1.0, (1,): 0.5})
    elements, weights = G.haar()
    assert np.sum(weights * density_values(psi, elements)) == \
        pytest.approx(1.0)
    assert density_l1(None, G) == pytest.approx(1.0)
    assert density_l1(psi, G) >= 1.0


def test_sot_convergence(fock_small):
    """Ensure convolved sequences converge with the sequence."""
    S = phi_op(fock_small)
    sequence = [S + matrix_unit(fock_small, 0, 0) / k for k in (1, 2, 4, 8)]
    table = sot_convergence_check(sequence, S, None, Torus(1, 8),
                                  test_vectors=3)
    assert table.parameters == [1, 2, 3, 4]
    assert table.is_monotone()
    assert table.improves()
    assert table.final == pytest.approx(1 / 8)


def test_translated_finite_set(fock):
    """Ensure a finite set holding a translation moves radial symbols off
    the diagonal."""
    G = FiniteSet([GroupElement.translation([0.5])])
    moved = conv_g_symbol(None, phi(), G)
    assert not moved.is_radial

    T = toeplitz(fock, moved)
    expected = toeplitz(fock, phi().translate([0.5]))
    assert np.max(np.abs(T.entries - expected.entries)) < 1e-8

    off_diagonal = T.entries - np.diag(np.diag(T.entries))
    assert np.linalg.norm(off_diagonal) > 1e-2

    # Rotations alone keep the label.
    rotations = FiniteSet([GroupElement.rotation(0.3),
                           GroupElement.rotation(-1.1)])
    assert conv_g_symbol(None, phi(), rotations).is_radial


def test_invariance_criterion():
    """Ensure psi *_G a = (integral psi) a exactly when a is invariant."""
    G = Torus(1)
    psi = trigonometric_density({(0,): 2.0, (1,): 0.5})
    mass = 2.0
    points = np.array([[0.1 + 0.2j], [0.7 - 0.4j], [-0.3 + 0.9j]])

    invariant = phi()
    assert is_invariant_symbol(invariant, G)
    averaged = conv_g_symbol(psi, invariant, G)
    assert np.allclose(averaged(points), mass * invariant(points),
                       atol=1e-10)

    moving = from_name('shifted_gaussian')
    assert not is_invariant_symbol(moving, G)
    averaged = conv_g_symbol(psi, moving, G)
    assert np.max(np.abs(averaged(points) - mass * moving(points))) > 1e-2
