"""Subgroups of U(n) x C^n acting on C^n, on symbols and on operators.

An element g = (A, z) acts on points by ``g . w = A w + z`` and on functions
by ``f -> f(g^{-1} .)``. On the Fock space the action is realised by the
projective representation ``pi(g) = W_z R_A``, where R_A is the rotation
``f -> f(A^{-1} .)``; operators are translated by ``S -> pi(g) S pi(g)^*``.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import qr

from qhalab.conv import ConvQuadrature, translation_sum
from qhalab.errors import InvalidParameterError, NonUnitaryError
from qhalab.operators import OperatorMatrix, weyl_batch
from qhalab.report import ErrorTable
from qhalab.space import TruncatedSpace, as_points
from qhalab.symbols import Symbol

log = logging.getLogger(__name__)

#: Largest entry of ``A^* A - I`` accepted for a group element.
UNITARY_TOLERANCE = 1e-12

#: Pseudo-random elements drawn by :func:`is_invariant`.
INVARIANCE_SAMPLES = 32


class GroupElement:
    """An element (A, z) of U(n) x C^n.

    :raises NonUnitaryError: `A` is not unitary within
                             :data:`UNITARY_TOLERANCE`.
    """
    __slots__ = ('A', 'z')

    def __init__(self, A, z=None):
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        if A.shape[0] != A.shape[1]:
            raise InvalidParameterError(
                f'Group elements need a square matrix, got shape {A.shape}.'
            )
        deviation = np.max(np.abs(A.conj().T @ A - np.eye(len(A))))
        if deviation > UNITARY_TOLERANCE:
            raise NonUnitaryError(
                f'A^*A deviates from the identity by {deviation:.3e}.'
            )
        z = np.zeros(len(A), dtype=complex) if z is None else \
            np.asarray(z, dtype=complex).reshape(-1)
        if len(z) != len(A):
            raise InvalidParameterError(
                f'Translation of length {len(z)} does not match a'
                f' {len(A)}x{len(A)} rotation.'
            )
        self.A = A
        self.z = z

    @classmethod
    def identity(cls, n: int) -> 'GroupElement':
        return cls(np.eye(n))

    @classmethod
    def rotation(cls, angles) -> 'GroupElement':
        """The diagonal rotation ``diag(exp(i angles))``."""
        return cls(np.diag(np.exp(1j * np.atleast_1d(angles))))

    @classmethod
    def translation(cls, z) -> 'GroupElement':
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return cls(np.eye(len(z)), z)

    @property
    def n(self) -> int:
        return len(self.z)

    @property
    def is_rotation(self) -> bool:
        return not np.any(self.z)

    def __mul__(self, other: 'GroupElement') -> 'GroupElement':
        return GroupElement(self.A @ other.A, self.A @ other.z + self.z)

    def inverse(self) -> 'GroupElement':
        A_inv = self.A.conj().T
        return GroupElement(A_inv, -A_inv @ self.z)

    def act(self, w) -> np.ndarray:
        points = as_points(w, self.n)
        moved = points @ self.A.T + self.z[None, :]
        return moved[0] if np.ndim(w) <= 1 and len(moved) == 1 else moved

    def to_dict(self) -> Dict:
        return {
            'A': [[[v.real, v.imag] for v in row] for row in self.A],
            'z': [[v.real, v.imag] for v in self.z]
        }

    def __repr__(self):
        return f'<GroupElement(n={self.n}, z={self.z.tolist()})>'


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """A Haar-distributed unitary from the QR decomposition of a complex
    Ginibre matrix, with the phases of R moved into Q."""
    Z = (rng.standard_normal((n, n)) +
         1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))[None, :]


def _block_unitary(partition, rng) -> np.ndarray:
    n = sum(partition)
    A = np.zeros((n, n), dtype=complex)
    start = 0
    for size in partition:
        A[start:start + size, start:start + size] = haar_unitary(size, rng)
        start += size
    return A


def _torus_grid(n: int, K: int) -> Tuple[List[GroupElement], np.ndarray]:
    theta = 2 * np.pi * np.arange(K) / K
    mesh = np.meshgrid(*(theta,) * n, indexing='ij')
    angles = np.stack([m.reshape(-1) for m in mesh], axis=1)
    elements = [GroupElement.rotation(a) for a in angles]
    return elements, np.full(len(elements), 1.0 / len(elements))


def _validate_partition(partition, n: int = None) -> Tuple[int, ...]:
    partition = tuple(int(p) for p in partition)
    if not partition or any(p < 1 for p in partition):
        raise InvalidParameterError(
            f'A partition needs positive block sizes, got {partition!r}.'
        )
    if n is not None and sum(partition) != n:
        raise InvalidParameterError(
            f'Partition {partition!r} does not sum to n={n}.'
        )
    return partition


class Subgroup:
    """
    Base class for subgroups of U(n) x C^n together with a quadrature for
    their Haar measure.
    """
    #: Short name used in configuration files and reports.
    KIND = None
    #: ``True`` if the Haar measure is a probability measure.
    COMPACT = True

    def __init__(self, n: int):
        if int(n) != n or n < 1:
            raise InvalidParameterError(
                f'Group dimension must be a positive integer, got {n!r}.'
            )
        self.n = int(n)

    def haar(self) -> Tuple[List[GroupElement], np.ndarray]:
        """Quadrature nodes and weights for the Haar measure."""
        raise NotImplementedError()

    def sample(self, count: int, seed: int = 0) -> List[GroupElement]:
        """`count` pseudo-random elements, reproducible for a given
        `seed`."""
        raise NotImplementedError()

    def generators(self) -> List[GroupElement]:
        return []

    def partition(self) -> Optional[Tuple[int, ...]]:
        """Block sizes of the invariant subspace decomposition, for groups
        whose averages have a closed form."""
        return None

    def to_dict(self) -> Dict:
        return {'kind': self.KIND, 'n': self.n}

    def __repr__(self):
        return f'<{type(self).__name__}(n={self.n})>'


class Translations(Subgroup):
    """The translations C^n, with Lebesgue measure discretised on a uniform
    box."""
    KIND = 'translations'
    COMPACT = False

    def __init__(self, n: int = 1, box_radius: float = 3.0,
                 resolution: int = 25):
        super().__init__(n)
        self.quadrature = ConvQuadrature.uniform(n, box_radius, resolution)

    def haar(self):
        q = self.quadrature
        return [GroupElement.translation(z) for z in q.nodes], q.weights

    def sample(self, count, seed=0):
        rng = np.random.default_rng(seed)
        z = 0.5 * (rng.standard_normal((count, self.n)) +
                   1j * rng.standard_normal((count, self.n)))
        return [GroupElement.translation(p) for p in z]

    def to_dict(self):
        return {
            **super().to_dict(),
            'box_radius': self.quadrature.box_radius,
            'resolution': self.quadrature.resolution
        }


class Torus(Subgroup):
    """Diagonal unitaries, averaged on a uniform angle grid.

    The grid is exact for trigonometric polynomials of degree below
    `angle_grid` in each angle.
    """
    KIND = 'torus'

    def __init__(self, n: int = 1, angle_grid: int = 32):
        super().__init__(n)
        self.angle_grid = int(angle_grid)

    def haar(self):
        return _torus_grid(self.n, self.angle_grid)

    def sample(self, count, seed=0):
        rng = np.random.default_rng(seed)
        return [
            GroupElement.rotation(a)
            for a in rng.uniform(0, 2 * np.pi, (count, self.n))
        ]

    def generators(self):
        step = 2 * np.pi / self.angle_grid
        return [
            GroupElement.rotation(step * np.eye(self.n)[j])
            for j in range(self.n)
        ]

    def partition(self):
        return (1,) * self.n

    def to_dict(self):
        return {**super().to_dict(), 'angle_grid': self.angle_grid}


class FullUnitary(Subgroup):
    """U(n), averaged by Monte Carlo over Haar samples."""
    KIND = 'full_unitary'

    def __init__(self, n: int = 1, mc_samples: int = 4096, seed: int = 0):
        super().__init__(n)
        self.mc_samples = int(mc_samples)
        self.seed = int(seed)

    def haar(self):
        elements = self.sample(self.mc_samples, self.seed)
        return elements, np.full(len(elements), 1.0 / len(elements))

    def sample(self, count, seed=0):
        rng = np.random.default_rng(seed)
        return [GroupElement(haar_unitary(self.n, rng)) for _ in range(count)]

    def partition(self):
        return (self.n,)

    def to_dict(self):
        return {
            **super().to_dict(),
            'mc_samples': self.mc_samples,
            'seed': self.seed
        }


class QuasiRadialBlocks(Subgroup):
    """Block-diagonal unitaries U(n_1) x ... x U(n_k).

    With every block of size one this is the torus and is averaged on an
    angle grid, otherwise by Monte Carlo.
    """
    KIND = 'quasi_radial'

    def __init__(self, partition: Sequence[int], angle_grid: int = 32,
                 mc_samples: int = 4096, seed: int = 0):
        self.blocks = _validate_partition(partition)
        super().__init__(sum(self.blocks))
        self.angle_grid = int(angle_grid)
        self.mc_samples = int(mc_samples)
        self.seed = int(seed)

    def haar(self):
        if all(size == 1 for size in self.blocks):
            return _torus_grid(self.n, self.angle_grid)
        elements = self.sample(self.mc_samples, self.seed)
        return elements, np.full(len(elements), 1.0 / len(elements))

    def sample(self, count, seed=0):
        rng = np.random.default_rng(seed)
        return [
            GroupElement(_block_unitary(self.blocks, rng))
            for _ in range(count)
        ]

    def generators(self):
        if all(size == 1 for size in self.blocks):
            return Torus(self.n, self.angle_grid).generators()
        return []

    def partition(self):
        return self.blocks

    def to_dict(self):
        return {
            **super().to_dict(),
            'partition': list(self.blocks),
            'angle_grid': self.angle_grid,
            'mc_samples': self.mc_samples,
            'seed': self.seed
        }

    def __repr__(self):
        return f'<QuasiRadialBlocks({self.blocks})>'


class FiniteSet(Subgroup):
    """A finite set of elements with normalised positive weights."""
    KIND = 'finite'

    def __init__(self, elements: Sequence[GroupElement], weights=None):
        if not elements:
            raise InvalidParameterError('A FiniteSet needs elements.')
        super().__init__(elements[0].n)
        weights = np.ones(len(elements)) if weights is None else \
            np.asarray(weights, dtype=float)
        if len(weights) != len(elements) or np.any(weights <= 0):
            raise InvalidParameterError(
                f'FiniteSet weights must be positive, one per element, got'
                f' {weights!r}.'
            )
        self.elements = list(elements)
        self.weights = weights / weights.sum()

    def haar(self):
        return self.elements, self.weights

    def sample(self, count, seed=0):
        rng = np.random.default_rng(seed)
        picks = rng.integers(0, len(self.elements), count)
        return [self.elements[i] for i in picks]

    def generators(self):
        return list(self.elements)

    def to_dict(self):
        return {
            **super().to_dict(),
            'elements': [g.to_dict() for g in self.elements],
            'weights': self.weights.tolist()
        }


#: Subgroup kinds selectable by name.
KINDS = {
    cls.KIND: cls
    for cls in (Translations, Torus, FullUnitary, QuasiRadialBlocks, FiniteSet)
}


def act_point(g: GroupElement, w) -> np.ndarray:
    """``g . w = A w + z``."""
    return g.act(w)


def act_symbol(g: GroupElement, a: Symbol) -> Symbol:
    """The moved symbol ``w -> a(g^{-1} . w)``."""
    return a.moved(g.A, g.z)


def rotation_matrix(space: TruncatedSpace, A) -> np.ndarray:
    """The matrix of ``f -> f(A^{-1} .)``, block diagonal by total degree.

    Column k holds the expansion of ``(A^{-1} w)^k`` in monomials, built
    degree by degree from ``(A^{-1} w)^k = (A^{-1} w)_m (A^{-1} w)^{k - d_m}``
    where m is the first nonzero exponent of k.
    """
    B = np.asarray(A, dtype=complex).conj().T
    n, dim = space.n, space.dim
    E = space.exponents

    raise_ = np.full((n, dim), -1)
    for i, k in enumerate(space.indices):
        if sum(k) < space.N:
            for m in range(n):
                raised = list(k)
                raised[m] += 1
                raise_[m, i] = space.index(tuple(raised))

    P = np.zeros((dim, dim), dtype=complex)
    P[0, 0] = 1.0
    for i, k in enumerate(space.indices[1:], start=1):
        m = int(np.nonzero(E[i])[0][0])
        lowered = list(k)
        lowered[m] -= 1
        source = P[:, space.index(tuple(lowered))]
        support = np.nonzero(source)[0]
        for axis in range(n):
            if B[m, axis] != 0:
                P[raise_[axis, support], i] += B[m, axis] * source[support]

    return space.norms[None, :] * P / space.norms[:, None]


def proj_rep(space: TruncatedSpace, g: GroupElement, *,
             method: str = 'laguerre') -> OperatorMatrix:
    """The matrix of ``pi(g) = W_z R_A``.

    Exactly unitary for rotations; translations inherit the truncation of
    the Weyl operator.
    """
    R = rotation_matrix(space, g.A)
    if g.is_rotation:
        return OperatorMatrix(space, R)
    W = weyl_batch(space, g.z[None, :], method=method)[0]
    return OperatorMatrix(space, W @ R)


def translate_op_g(space: TruncatedSpace, g: GroupElement,
                   S: OperatorMatrix) -> OperatorMatrix:
    """``pi(g) S pi(g)^*``."""
    P = proj_rep(space, g)
    return P @ S @ P.adjoint


Density = Union[None, Symbol, Callable[[GroupElement], complex]]


def density_values(psi: Density, elements: Sequence[GroupElement]
                   ) -> np.ndarray:
    """Evaluate a density on group elements.

    ``None`` is the constant 1, a :class:`Symbol` is evaluated at the
    translation part, and any other callable receives the element.
    """
    if psi is None:
        return np.ones(len(elements), dtype=complex)
    if isinstance(psi, Symbol):
        return psi(np.stack([g.z for g in elements]))
    return np.array([psi(g) for g in elements], dtype=complex)


def trigonometric_density(modes: Dict[Tuple[int, ...], complex]) -> Callable:
    """The density ``sum_m c_m exp(i <m, theta>)`` on a torus, where theta are
    the angles of the diagonal of A."""
    items = [(np.asarray(m), c) for m, c in modes.items()]

    def density(g: GroupElement) -> complex:
        theta = np.angle(np.diag(g.A))
        return sum(c * np.exp(1j * np.dot(m, theta)) for m, c in items)

    return density


def density_l1(psi: Density, G: Subgroup) -> float:
    """``||psi||_1`` with respect to the Haar quadrature of `G`."""
    elements, weights = G.haar()
    return float(np.sum(weights * np.abs(density_values(psi, elements))))


def conv_g_symbol(psi: Density, a: Symbol, G: Subgroup) -> Symbol:
    """``(psi *_G a)(w) = integral a(g^{-1} . w) psi(g) dg``."""
    elements, weights = G.haar()
    coeffs = weights * density_values(psi, elements)
    keep = np.nonzero(coeffs)[0]
    moves = [
        (elements[i].A.conj().T, elements[i].z, coeffs[i]) for i in keep
    ]
    evaluator = a.evaluator

    def convolved(points):
        out = np.zeros(len(points), dtype=complex)
        for A_inv, z, c in moves:
            out += c * evaluator((points - z[None, :]) @ A_inv.T)
        return out

    log.debug('conv_g_symbol over %d elements of %r', len(moves), G)
    return Symbol(
        convolved,
        kind='custom',
        is_radial=a.is_radial and all(
            elements[i].is_rotation for i in keep
        ),
        sup_bound=None if a.sup_bound is None
        else float(np.sum(np.abs(coeffs))) * a.sup_bound,
        name=f'{G.KIND}*{a.name}'
    )


def conv_g_op(psi: Density, S: OperatorMatrix,
              G: Subgroup) -> OperatorMatrix:
    """``psi *_G S = integral pi(g) S pi(g)^* psi(g) dg``."""
    space = S.space
    elements, weights = G.haar()
    coeffs = weights * density_values(psi, elements)

    if isinstance(G, Translations):
        diagnostics = []
        entries = translation_sum(
            space,
            np.stack([g.z for g in elements]),
            coeffs,
            S,
            diagnostics=diagnostics
        )
        return OperatorMatrix(space, entries, diagnostics=diagnostics)

    entries = np.zeros((space.dim, space.dim), dtype=complex)
    for g, c in zip(elements, coeffs):
        if c == 0:
            continue
        P = proj_rep(space, g).entries
        entries += c * (P @ S.entries @ P.conj().T)
    log.debug('conv_g_op over %d elements of %r', len(elements), G)
    return OperatorMatrix(space, entries)


def block_degrees(space: TruncatedSpace, partition) -> np.ndarray:
    """Total degree of each basis vector within each block of coordinates,
    shape ``(dim, len(partition))``."""
    partition = _validate_partition(partition, space.n)
    bounds = np.cumsum((0,) + partition)
    return np.stack([
        space.exponents[:, bounds[i]:bounds[i + 1]].sum(axis=1)
        for i in range(len(partition))
    ], axis=1)


def schur_average(space: TruncatedSpace, S: OperatorMatrix,
                  partition) -> OperatorMatrix:
    """The exact Haar average of ``R_A S R_A^*`` over U(n_1) x ... x U(n_k).

    Polynomials of a fixed block multi-degree form inequivalent irreducible
    representations, so the average keeps, on each such subspace, the
    multiple of the identity with the same trace, and drops everything
    between different subspaces. For blocks of size one this is the
    diagonal of S.
    """
    keys = block_degrees(space, partition)
    _, labels = np.unique(keys, axis=0, return_inverse=True)
    labels = labels.reshape(-1)

    diagonal = np.diag(S.entries)
    averaged = np.zeros(space.dim, dtype=complex)
    for label in np.unique(labels):
        members = labels == label
        averaged[members] = np.mean(diagonal[members])
    return OperatorMatrix(space, np.diag(averaged))


def radialize(space: TruncatedSpace, S: OperatorMatrix, G: Subgroup, *,
              method: str = 'auto') -> OperatorMatrix:
    """The Haar average of ``pi(g) S pi(g)^*`` over a compact subgroup of
    U(n).

    :param method: ``exact`` uses :func:`schur_average`, ``quadrature`` sums
                   over the Haar quadrature of `G`, and ``auto`` picks
                   ``exact`` whenever `G` has a block structure.
                   [default: auto]
    :raises InvalidParameterError: `G` is not compact.
    """
    if not G.COMPACT:
        raise InvalidParameterError(
            f'radialize() averages over compact groups only, got {G!r}.'
        )
    partition = G.partition()
    if method == 'auto':
        method = 'exact' if partition is not None else 'quadrature'
    if method == 'exact':
        if partition is None:
            raise InvalidParameterError(
                f'{G!r} has no closed-form average.'
            )
        return schur_average(space, S, partition)
    if method != 'quadrature':
        raise InvalidParameterError(
            f'Unknown radialization method {method!r}.'
        )
    return conv_g_op(None, S, G)


@dataclass(frozen=True)
class InvarianceReport:
    """Outcome of an invariance check."""
    invariant: bool
    #: Largest deviation found.
    deviation: float
    #: Number of group elements examined.
    samples: int
    tolerance: float

    def __bool__(self):
        return self.invariant


def _check_elements(G: Subgroup, samples: int, seed: int):
    return G.sample(samples, seed) + G.generators()


def is_invariant(S: OperatorMatrix, G: Subgroup, *,
                 samples: int = INVARIANCE_SAMPLES, tol: float = 1e-8,
                 seed: int = 0, size: int = None) -> InvarianceReport:
    """Check ``pi(g) S pi(g)^* = S`` on sampled elements and the generators
    of `G`, on the leading ``size x size`` block.

    :param size: [default: the space's leading dimension]
    """
    space = S.space
    elements = _check_elements(G, samples, seed)
    deviation = 0.0
    for g in elements:
        moved = translate_op_g(space, g, S)
        deviation = max(deviation, float(np.linalg.norm(
            (moved - S).block(size), ord=2
        )))
    return InvarianceReport(
        invariant=deviation <= tol,
        deviation=deviation,
        samples=len(elements),
        tolerance=tol
    )


def is_invariant_symbol(a: Symbol, G: Subgroup, *, points=None,
                        samples: int = INVARIANCE_SAMPLES, tol: float = 1e-8,
                        seed: int = 0) -> InvarianceReport:
    """Check ``a(g^{-1} . w) = a(w)`` on sampled elements and points.

    :param points: [default: 64 seeded points with |w| <= 2]
    """
    if points is None:
        rng = np.random.default_rng(seed)
        raw = rng.standard_normal((64, G.n)) + \
            1j * rng.standard_normal((64, G.n))
        radius = 2 * rng.uniform(0, 1, 64) / np.linalg.norm(raw, axis=1)
        points = raw * radius[:, None]
    points = as_points(points, G.n)

    base = a(points)
    elements = _check_elements(G, samples, seed)
    deviation = 0.0
    for g in elements:
        moved = act_symbol(g, a)(points)
        deviation = max(deviation, float(np.max(np.abs(moved - base))))
    return InvarianceReport(
        invariant=deviation <= tol,
        deviation=deviation,
        samples=len(elements),
        tolerance=tol
    )


def sot_convergence_check(sequence: Sequence[OperatorMatrix],
                          S: OperatorMatrix, psi: Density, G: Subgroup, *,
                          test_vectors: int = 5) -> ErrorTable:
    """Table of ``||(psi *_G S_k - psi *_G S) e_j||`` over the sequence.

    The parameter column holds k, starting at 1.
    """
    limit = conv_g_op(psi, S, G).entries
    table = ErrorTable(name='sot_group', parameter='k')
    for k, S_k in enumerate(sequence, start=1):
        D = conv_g_op(psi, S_k, G).entries - limit
        for j in range(test_vectors):
            table.add(k, j, float(np.linalg.norm(D[:, j])))
    return table
