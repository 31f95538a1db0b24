"""Truncated models of the Fock space F^2(C^n) and the Bergman space
A^2(B^n).

A :class:`TruncatedSpace` is spanned by the orthonormalised monomials
``e_k = c_k z^k`` with total degree ``|k| <= N``. Basis vectors are ordered by
total degree, and within a degree in decreasing lexicographic order, so the
constant function is always index 0 and every unitary rotation acts block
diagonally.
"""
import logging
import itertools
from typing import Sequence, Tuple

import numpy as np
from scipy.special import comb

from qhalab.backends import QuadratureRule, available_backends
from qhalab.errors import (
    DegreeOverflowError,
    InvalidParameterError,
    QuadratureError
)

log = logging.getLogger(__name__)

#: Entrywise tolerance on the Gram matrix of a freshly built space.
ORTHONORMALITY_TOLERANCE = 1e-10

MultiIndex = Tuple[int, ...]


def dimension(n: int, N: int) -> int:
    """Number of multi-indices in n variables with total degree at most N."""
    return int(comb(n + N, n, exact=True))


def multi_indices(n: int, N: int) -> Tuple[MultiIndex, ...]:
    """All multi-indices of length `n` with ``|k| <= N`` in basis order.

    >>> multi_indices(2, 1)
    ((0, 0), (1, 0), (0, 1))
    """
    indices = []
    for degree in range(N + 1):
        block = [
            k for k in itertools.product(range(degree, -1, -1), repeat=n)
            if sum(k) == degree
        ]
        indices.extend(block)
    return tuple(indices)


def as_points(z, n: int) -> np.ndarray:
    """Coerce a point or a batch of points of C^n to shape ``(m, n)``."""
    points = np.asarray(z, dtype=complex)
    if points.ndim == 0:
        points = points.reshape(1, 1)
    elif points.ndim == 1:
        points = points.reshape(-1, n) if n > 1 else points.reshape(-1, 1)
    if points.shape[-1] != n:
        raise InvalidParameterError(
            f'Expected points in C^{n}, got an array of shape {points.shape}.'
        )
    return points


class TruncatedSpace:
    """A finite-dimensional model of F^2(C^n) or A^2(B^n).

    >>> space = TruncatedSpace(1, 16)
    >>> space.dim
    17

    :param n: Complex dimension.
    :param N: Maximum total degree of the monomial basis.
    :param space_kind: Name of the backend providing the measure.
                       [default: fock]
    :param order: Quadrature order per axis. [default: backend specific]
    """
    __slots__ = (
        'n', 'N', 'space_kind', 'backend', 'indices', 'exponents', 'degrees',
        'norms', 'quadrature', '_index_of', '_nodes_basis'
    )

    def __init__(self, n: int, N: int, *, space_kind: str = 'fock',
                 order: int = None):
        if int(n) != n or n < 1:
            raise InvalidParameterError(
                f'The complex dimension must be a positive integer, got {n!r}.'
            )
        if int(N) != N or N < 0:
            raise InvalidParameterError(
                f'The truncation degree must be a nonnegative integer,'
                f' got {N!r}.'
            )

        backends = available_backends()
        if space_kind not in backends:
            raise InvalidParameterError(
                f'Unknown space kind {space_kind!r}, expected one of'
                f' {sorted(backends)}.'
            )

        #: Complex dimension.
        self.n = int(n)
        #: Maximum total degree.
        self.N = int(N)
        #: Name of the backend, ``fock`` or ``bergman``.
        self.space_kind = space_kind
        #: Backend instance owning the measure.
        self.backend = backends[space_kind]()
        #: Basis labels in basis order.
        self.indices = multi_indices(self.n, self.N)
        #: Integer array of basis labels, shape ``(dim, n)``.
        self.exponents = np.array(self.indices, dtype=int).reshape(-1, self.n)
        #: Total degree of each basis vector.
        self.degrees = self.exponents.sum(axis=1)
        #: Normalising constants c_k.
        self.norms = self.backend.basis_norms(self.exponents)
        self._index_of = {k: i for i, k in enumerate(self.indices)}
        self._nodes_basis = None

        if order is None:
            order = self.backend.default_order(self.n, self.N)
        #: Quadrature rule for the space's measure.
        self.quadrature = build_quadrature(self, order)

    @property
    def dim(self) -> int:
        return len(self.indices)

    @property
    def is_fock(self) -> bool:
        return self.space_kind == 'fock'

    def index(self, k: Sequence[int]) -> int:
        """Position of the multi-index `k` in the basis."""
        k = tuple(int(v) for v in k)
        if len(k) != self.n or any(v < 0 for v in k):
            raise InvalidParameterError(
                f'{k!r} is not a multi-index of length {self.n}.'
            )
        if sum(k) > self.N:
            raise DegreeOverflowError(
                f'Multi-index {k!r} has degree {sum(k)}, above the'
                f' truncation degree {self.N}.'
            )
        return self._index_of[k]

    def leading_dim(self, degree: int = None) -> int:
        """Number of basis vectors of degree at most `degree`.

        :param degree: [default: N // 2]
        """
        if degree is None:
            degree = self.N // 2
        return dimension(self.n, min(degree, self.N))

    def basis(self, points) -> np.ndarray:
        """Evaluate every basis vector at `points`.

        Returns an array of shape ``(m, dim)`` whose column k holds e_k.
        """
        points = as_points(points, self.n)
        powers = points[:, :, None] ** np.arange(self.N + 1)[None, None, :]
        values = np.ones((len(points), self.dim), dtype=complex)
        for axis in range(self.n):
            values *= powers[:, axis, self.exponents[:, axis]]
        return values * self.norms[None, :]

    @property
    def nodes_basis(self) -> np.ndarray:
        """Basis evaluated on the quadrature nodes, computed once."""
        if self._nodes_basis is None:
            self._nodes_basis = self.basis(self.quadrature.nodes)
        return self._nodes_basis

    def gram(self, rule: QuadratureRule = None) -> np.ndarray:
        """Gram matrix of the basis under `rule` (default: own quadrature)."""
        if rule is None:
            values = self.nodes_basis
            rule = self.quadrature
        else:
            values = self.basis(rule.nodes)
        return (values.conj().T * rule.weights[None, :]) @ values

    def with_degree(self, N: int) -> 'TruncatedSpace':
        """A space of the same kind truncated at degree `N`."""
        return TruncatedSpace(self.n, N, space_kind=self.space_kind)

    def to_dict(self):
        return {
            'space_kind': self.space_kind,
            'n': self.n,
            'N': self.N,
            'dim': self.dim,
            'order': self.quadrature.order
        }

    def __eq__(self, other):
        return (
            isinstance(other, TruncatedSpace) and
            self.space_kind == other.space_kind and
            self.n == other.n and
            self.N == other.N
        )

    def __hash__(self):
        return hash((self.space_kind, self.n, self.N))

    def __repr__(self):
        return f'<TruncatedSpace({self.space_kind}, n={self.n}, N={self.N})>'


def build_quadrature(space: TruncatedSpace, order: int) -> QuadratureRule:
    """Build and validate a quadrature rule for the measure of `space`.

    The rule is accepted only if it reproduces the orthonormality of the
    basis within :data:`ORTHONORMALITY_TOLERANCE` entrywise.
    """
    if int(order) != order or order < 1:
        raise InvalidParameterError(
            f'Quadrature order must be a positive integer, got {order!r}.'
        )

    rule = space.backend.build_quadrature(space.n, space.N, int(order))
    deviation = np.max(np.abs(space.gram(rule) - np.eye(space.dim)))
    if not deviation <= ORTHONORMALITY_TOLERANCE:
        raise QuadratureError(
            f'Quadrature of order {order} does not reproduce the'
            f' orthonormality of {space!r} (max deviation {deviation:.3e}).'
            f' Increase the order.'
        )

    log.debug('%r: quadrature order %d accepted (%.1e)', space, order,
              deviation)
    return rule


def basis_eval(space: TruncatedSpace, k: Sequence[int], z) -> complex:
    """Evaluate the orthonormal basis vector ``e_k`` at the point `z`.

    >>> basis_eval(TruncatedSpace(1, 4), (1,), 1.0)  # sqrt(pi)
    (1.7724538509055159+0j)
    """
    i = space.index(k)
    return complex(space.basis(as_points(z, space.n)[:1])[0, i])


def _require_fock(space, what):
    if not space.is_fock:
        raise InvalidParameterError(
            f'{what} is only defined on the Fock space, got {space!r}.'
        )


def kernel(space: TruncatedSpace, z, w) -> np.ndarray:
    """The reproducing kernel ``K_z(w) = exp(pi <w, z>)`` of F^2(C^n).

    `z` and `w` may be single points or equally sized batches.
    """
    _require_fock(space, 'kernel()')
    z = as_points(z, space.n)
    w = as_points(w, space.n)
    values = np.exp(np.pi * np.sum(w * z.conj(), axis=1))
    return values[0] if len(values) == 1 else values


def normalized_kernel_coeffs(space: TruncatedSpace, z) -> np.ndarray:
    """Coefficients of the normalised kernel k_z in the basis {e_k}.

    Entry k equals ``exp(-pi |z|^2 / 2) conj(e_k(z))``. A single point gives a
    vector of length ``dim``, a batch gives shape ``(m, dim)``.
    """
    _require_fock(space, 'normalized_kernel_coeffs()')
    single = np.ndim(z) == 0 or (np.ndim(z) == 1 and space.n > 1
                                 and np.shape(z)[0] == space.n)
    points = as_points(z, space.n)
    damping = np.exp(-np.pi * np.sum(np.abs(points) ** 2, axis=1) / 2)
    coeffs = damping[:, None] * space.basis(points).conj()
    return coeffs[0] if single else coeffs
