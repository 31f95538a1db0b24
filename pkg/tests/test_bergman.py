import numpy as np
import pytest

from qhalab.bergman import (
    bergman_toeplitz,
    density_contraction_check,
    quasi_radial_symbol,
    quasi_radialize
)
from qhalab.errors import (
    InvalidParameterError,
    NotInvariantError,
    RejectedSymbolError
)
from qhalab.groups import QuasiRadialBlocks, is_invariant, radialize
from qhalab.operators import (
    OperatorMatrix,
    diagonal,
    matrix_unit,
    op_norm_estimate
)
from qhalab.symbols import Symbol, constant, from_name, random_polynomial


def _random_operator(space, seed):
    rng = np.random.default_rng(seed)
    return OperatorMatrix(
        space,
        rng.standard_normal((space.dim,) * 2) +
        1j * rng.standard_normal((space.dim,) * 2)
    )


def test_bergman_toeplitz(bergman, fock_small):
    """Ensure Toeplitz operators on the ball."""
    T = bergman_toeplitz(bergman, constant(1.0))
    assert np.allclose(T.entries, np.eye(bergman.dim), atol=1e-10)

    T = bergman_toeplitz(bergman, from_name('abs_squared'))
    k = np.arange(bergman.dim)
    assert np.allclose(np.diag(T.entries), (k + 1) / (k + 2), atol=1e-10)

    with pytest.raises(InvalidParameterError):
        bergman_toeplitz(fock_small, constant(1.0))


def test_singular_symbol(bergman):
    """Ensure symbols blowing up on the sphere are refused."""
    defect = Symbol(
        lambda points: 1 / np.round(
            1 - np.sum(np.abs(points) ** 2, axis=1), 12
        ),
        name='inverse_defect'
    )
    with pytest.raises(RejectedSymbolError):
        bergman_toeplitz(bergman, defect)


@pytest.mark.parametrize('partition', [(1, 1), (2,)])
def test_quasi_radialize(bergman2, partition):
    """Ensure QRad is an idempotent contraction onto invariant operators."""
    S = _random_operator(bergman2, 5)
    R = quasi_radialize(bergman2, S, partition)

    assert quasi_radialize(bergman2, R, partition) == R
    assert op_norm_estimate(R) <= op_norm_estimate(S) + 1e-12
    assert is_invariant(R, QuasiRadialBlocks(partition), samples=8,
                        size=bergman2.dim)
    assert radialize(bergman2, S, QuasiRadialBlocks(partition)) == R

    with pytest.raises(InvalidParameterError):
        quasi_radialize(bergman2, S, (1, 2))


def test_toeplitz_commutes(bergman2):
    """Ensure QRad T_a = T_{QRad a} on the torus."""
    a = random_polynomial(2, 2, seed=11, bound=1.0)
    left = quasi_radialize(bergman2, bergman_toeplitz(bergman2, a), (1, 1))
    right = bergman_toeplitz(bergman2, quasi_radial_symbol(a, (1, 1)))
    assert np.allclose(left.entries, right.entries, atol=1e-10)


def test_density_contraction(bergman2):
    """Ensure quasi-radial symbols approximate quasi-radial operators no
    worse than general ones."""
    target = diagonal(bergman2, 1 / (1 + bergman2.degrees))
    candidates = [
        random_polynomial(2, 2, seed=seed, bound=1.0) for seed in range(3)
    ]
    report = density_contraction_check(bergman2, target, candidates, (1, 1))
    assert report.holds
    assert len(report.rows) == 3
    assert report.worst_excess <= 1e-8
    assert report.to_dict()['partition'] == [1, 1]

    with pytest.raises(NotInvariantError) as e:
        density_contraction_check(
            bergman2, matrix_unit(bergman2, 0, 1), candidates, (1, 1)
        )
    assert e.value.deviation > 0
