import logging
from dataclasses import dataclass
from importlib.metadata import entry_points

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and positive weights integrating against a space's measure.

    The measure's density is folded into `weights`, so that
    ``rule.integrate(f(rule.nodes))`` approximates the integral of `f`.
    """
    #: Points in C^n, shape ``(m, n)``.
    nodes: np.ndarray
    #: Positive weights, shape ``(m,)``.
    weights: np.ndarray
    #: Number of one-dimensional nodes per axis used to build the rule.
    order: int

    @property
    def mass(self) -> float:
        """Total mass of the rule."""
        return float(np.sum(self.weights))

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Contract `values` (leading axis over nodes) with the weights."""
        return np.tensordot(self.weights, values, axes=(0, 0))

    def __len__(self):
        return len(self.weights)

    def __repr__(self):
        return (
            f'<QuadratureRule(nodes={len(self.weights)}, order={self.order})>'
        )


class Backend:
    """
    Base class for all space backends.

    A backend knows the measure of one family of holomorphic function spaces.
    It produces a quadrature rule for that measure and the normalising
    constants that turn monomials into an orthonormal basis.
    """
    #: A short, one-line description of this backend. Used for command
    #: line help and error messages.
    DESCRIPTION = None
    #: The ``space_kind`` served by this backend.
    SPACE_KIND = None

    def default_order(self, n: int, N: int) -> int:
        raise NotImplementedError()

    def build_quadrature(self, n: int, N: int, order: int) -> QuadratureRule:
        raise NotImplementedError()

    def basis_norms(self, exponents: np.ndarray) -> np.ndarray:
        """Return the constants c_k making c_k z^k a unit vector, one per row
        of the integer array `exponents`."""
        raise NotImplementedError()

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of the points lying in the domain of the space."""
        raise NotImplementedError()


def _plugin_entry_points(group):
    try:
        return entry_points(group=group)
    except TypeError:
        # Python 3.8 and 3.9 only support the dict interface.
        return entry_points().get(group, [])


def available_backends():
    from qhalab.backends.fock import FockBackend
    from qhalab.backends.bergman import BergmanBackend

    backends = {
        'fock': FockBackend,
        'bergman': BergmanBackend
    }
    backends.update({
        entry_point.name: entry_point.load()
        for entry_point
        in _plugin_entry_points('qhalab.backends')
    })
    return backends
