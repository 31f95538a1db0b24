import numpy as np
import pytest

from qhalab.grid import SpectralGrid
from qhalab.operators import OperatorMatrix
from qhalab.space import TruncatedSpace


@pytest.fixture(scope='session')
def fock():
    return TruncatedSpace(1, 16)


@pytest.fixture(scope='session')
def fock_small():
    return TruncatedSpace(1, 8)


@pytest.fixture(scope='session')
def fock2():
    return TruncatedSpace(2, 4)


@pytest.fixture(scope='session')
def bergman():
    return TruncatedSpace(1, 8, space_kind='bergman')


@pytest.fixture(scope='session')
def bergman2():
    return TruncatedSpace(2, 4, space_kind='bergman')


@pytest.fixture(scope='session')
def grid():
    return SpectralGrid(1, 6.0, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_assertrepr_compare(config, op, left, right):
    if isinstance(left, OperatorMatrix) and \
            isinstance(right, OperatorMatrix) and op == '==':
        if left.space != right.space:
            return [
                'Operators act on different spaces:',
                f'  {left.space!r} != {right.space!r}'
            ]
        # The worst entry, then both leading blocks.
        diff = np.abs(left.entries - right.entries)
        j, k = np.unravel_index(np.argmax(diff), diff.shape)
        size = min(4, left.space.dim)
        with np.printoptions(precision=3, suppress=True, linewidth=120):
            return [
                'Operators are not equal:',
                f'  largest deviation {diff[j, k]:.3e} at entry ({j}, {k})',
                '  left leading block:',
                *str(left.entries[:size, :size]).split('\n'),
                '  right leading block:',
                *str(right.entries[:size, :size]).split('\n')
            ]
