"""Operators on a truncated space: Toeplitz and Weyl operators, parity, the
vacuum projection Phi and the Berezin transform.

An :class:`OperatorMatrix` holds the matrix of an operator in the
orthonormal monomial basis, entry ``(j, k) = <S e_k, e_j>``.
"""
import logging
import warnings
from typing import Dict, List

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from qhalab.backends.fock import FockBackend, hermite_rule, real_to_complex
from qhalab.errors import InvalidParameterError, TruncationWarning
from qhalab.space import (
    TruncatedSpace,
    as_points,
    normalized_kernel_coeffs
)
from qhalab.symbols import Symbol

log = logging.getLogger(__name__)

#: Leakage of the leading block out of the truncation above which a
#: translated operator is flagged.
TAIL_TOLERANCE = 1e-6


class OperatorMatrix:
    """The dense matrix of an operator on a :class:`TruncatedSpace`.

    Arithmetic with other operators on the same space and with scalars
    returns new instances; the entries are never modified in place.
    """
    __slots__ = ('space', 'entries', 'diagnostics')

    def __init__(self, space: TruncatedSpace, entries, *,
                 diagnostics: List[str] = None):
        entries = np.array(entries, dtype=complex)
        if entries.shape != (space.dim, space.dim):
            raise InvalidParameterError(
                f'Expected a {space.dim}x{space.dim} matrix for {space!r},'
                f' got shape {entries.shape}.'
            )
        if not np.all(np.isfinite(entries)):
            raise InvalidParameterError('Operator entries must be finite.')
        entries.setflags(write=False)
        #: The space the operator acts on.
        self.space = space
        #: Complex matrix, entry (j, k) = <S e_k, e_j>.
        self.entries = entries
        #: Human readable notes attached while the operator was built.
        self.diagnostics = list(diagnostics or [])

    @property
    def adjoint(self) -> 'OperatorMatrix':
        return OperatorMatrix(self.space, self.entries.conj().T)

    def block(self, size: int = None) -> np.ndarray:
        """The leading ``size x size`` block of the entries.

        :param size: [default: the space's leading dimension]
        """
        if size is None:
            size = self.space.leading_dim()
        return self.entries[:size, :size]

    def apply(self, vector) -> np.ndarray:
        return self.entries @ np.asarray(vector, dtype=complex)

    def _coerce(self, other):
        if isinstance(other, OperatorMatrix):
            if other.space != self.space:
                raise InvalidParameterError(
                    f'Operators act on different spaces: {self.space!r} and'
                    f' {other.space!r}.'
                )
            return other.entries
        return other

    def __add__(self, other):
        return OperatorMatrix(self.space, self.entries + self._coerce(other))

    def __sub__(self, other):
        return OperatorMatrix(self.space, self.entries - self._coerce(other))

    def __matmul__(self, other):
        return OperatorMatrix(self.space, self.entries @ self._coerce(other))

    def __mul__(self, scalar):
        return OperatorMatrix(self.space, self.entries * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return OperatorMatrix(self.space, -self.entries)

    def __eq__(self, other):
        return (
            isinstance(other, OperatorMatrix) and
            self.space == other.space and
            np.array_equal(self.entries, other.entries)
        )

    def to_dict(self) -> Dict:
        """JSON envelope with row-major ``[re, im]`` pairs."""
        return {
            'dim': self.space.dim,
            'n': self.space.n,
            'N': self.space.N,
            'space_kind': self.space.space_kind,
            'entries': [
                [float(v.real), float(v.imag)]
                for v in self.entries.reshape(-1)
            ]
        }

    @classmethod
    def from_dict(cls, data: Dict,
                  space: TruncatedSpace = None) -> 'OperatorMatrix':
        if space is None:
            space = TruncatedSpace(
                data['n'],
                data['N'],
                space_kind=data.get('space_kind', 'fock')
            )
        pairs = np.asarray(data['entries'], dtype=float)
        if len(pairs) != data['dim'] ** 2 or space.dim != data['dim']:
            raise InvalidParameterError(
                f'Envelope of dimension {data["dim"]} does not match'
                f' {space!r}.'
            )
        entries = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(space.dim, -1)
        return cls(space, entries)

    def __repr__(self):
        return f'<OperatorMatrix({self.space!r})>'


def identity(space: TruncatedSpace) -> OperatorMatrix:
    return OperatorMatrix(space, np.eye(space.dim))


def matrix_unit(space: TruncatedSpace, j: int, k: int) -> OperatorMatrix:
    """The operator E_jk = e_j (x) e_k, mapping e_k to e_j."""
    entries = np.zeros((space.dim, space.dim), dtype=complex)
    entries[j, k] = 1
    return OperatorMatrix(space, entries)


def diagonal(space: TruncatedSpace, values) -> OperatorMatrix:
    return OperatorMatrix(space, np.diag(np.asarray(values, dtype=complex)))


def toeplitz(space: TruncatedSpace, a: Symbol, *,
             order: int = None) -> OperatorMatrix:
    """The Toeplitz operator T_a = P M_a P compressed to the truncation.

    Entries are computed by quadrature of ``a e_k conj(e_j)`` against the
    space's measure. Real symbols give exactly self-adjoint matrices.

    :param order: Use a dedicated quadrature of this order instead of the
                  space's own rule, for symbols oscillating faster than the
                  basis.
    """
    if order is None or order == space.quadrature.order:
        rule = space.quadrature
        values = space.nodes_basis
    else:
        rule = space.backend.build_quadrature(space.n, space.N, order)
        values = space.basis(rule.nodes)

    samples = a.sample(rule.nodes)
    entries = (values.conj().T * (rule.weights * samples)[None, :]) @ values

    if not np.any(samples.imag):
        entries = (entries + entries.conj().T) / 2

    log.debug('toeplitz(%r) on %r with %d nodes', a, space, len(rule))
    return OperatorMatrix(space, entries)


def _require_fock(space: TruncatedSpace, what: str):
    if not space.is_fock:
        raise InvalidParameterError(
            f'{what} is only defined on the Fock space, got {space!r}.'
        )


def _displacement_closed_form(alpha: np.ndarray, N: int) -> np.ndarray:
    """One-mode matrices <e_j, D(alpha) e_k> for a batch of `alpha`."""
    j = np.arange(N + 1)[:, None]
    k = np.arange(N + 1)[None, :]
    lo = np.minimum(j, k)
    gap = np.abs(j - k)

    x = np.abs(alpha) ** 2
    laguerre = eval_genlaguerre(
        lo[None, :, :], gap[None, :, :], x[:, None, None]
    )
    magnitude = np.exp(
        0.5 * (gammaln(lo + 1) - gammaln(lo + gap + 1))[None, :, :]
        - x[:, None, None] / 2
    )
    step = np.where(
        (j >= k)[None, :, :],
        alpha[:, None, None],
        -np.conj(alpha)[:, None, None]
    )
    return magnitude * step ** gap[None, :, :] * laguerre


def _weyl_quadrature_1d(z: complex, N: int, order: int) -> np.ndarray:
    """One-mode Weyl matrix by quadrature.

    Substituting w = u + z/2 turns <W_z e_k, e_j> into

        exp(-pi |z|^2 / 4) * integral of exp(i pi Im(u conj z))
            e_k(u - z/2) conj(e_j(u + z/2)) against exp(-pi |u|^2) du,

    whose integrand is a polynomial times a bounded plane wave.
    """
    x, w = hermite_rule(order, 2)
    u = real_to_complex(x)[:, 0]
    norms = FockBackend().basis_norms(np.arange(N + 1)[:, None])
    powers = np.arange(N + 1)[None, :]

    left = norms[None, :] * (u - z / 2)[:, None] ** powers
    right = norms[None, :] * (u + z / 2)[:, None] ** powers
    phase = np.exp(1j * np.pi * np.imag(u * np.conj(z)))

    entries = (right.conj().T * (w * phase)[None, :]) @ left
    return np.exp(-np.pi * abs(z) ** 2 / 4) * entries


def weyl_batch(space: TruncatedSpace, points, *,
               method: str = 'laguerre') -> np.ndarray:
    """Weyl matrices for a batch of points, shape ``(m, dim, dim)``.

    W_z factorises over coordinates, so each matrix is assembled from
    one-mode matrices restricted to total degree at most N.

    :param method: ``laguerre`` for the closed form or ``quadrature``.
    """
    _require_fock(space, 'weyl_batch()')
    points = as_points(points, space.n)
    N = space.N
    E = space.exponents

    matrices = np.ones((len(points), space.dim, space.dim), dtype=complex)
    for axis in range(space.n):
        if method == 'laguerre':
            one_mode = _displacement_closed_form(
                np.sqrt(np.pi) * np.conj(points[:, axis]), N
            )
        elif method == 'quadrature':
            one_mode = np.stack([
                _weyl_quadrature_1d(z, N, _weyl_order(N, abs(z)))
                for z in points[:, axis]
            ])
        else:
            raise InvalidParameterError(
                f'Unknown Weyl method {method!r}, expected laguerre or'
                f' quadrature.'
            )
        matrices *= one_mode[:, E[:, axis][:, None], E[:, axis][None, :]]
    return matrices


def _weyl_order(N, radius):
    return N + 16 + 4 * int(np.ceil(np.sqrt(np.pi) * radius))


def weyl_tail(space: TruncatedSpace, W: np.ndarray, size: int = None) -> float:
    """Probability mass the leading block of `W` loses to the truncation.

    Rows of the full Weyl operator are unit vectors, so ``1 - ||row||^2``
    over the leading rows is exactly the missing mass, and it bounds every
    entry of ``W W^* - I`` on the leading block.
    """
    if size is None:
        size = space.leading_dim()
    rows = np.sum(np.abs(W[..., :size, :]) ** 2, axis=-1)
    return float(np.max(1 - rows))


def weyl(space: TruncatedSpace, z, *, method: str = 'quadrature',
         tail_tolerance: float = TAIL_TOLERANCE) -> OperatorMatrix:
    """The Weyl operator W_z f(w) = k_z(w) f(w - z).

    A :class:`TruncationWarning` is emitted, and recorded in the result's
    diagnostics, when the leading block leaks more than `tail_tolerance`.
    """
    _require_fock(space, 'weyl()')
    W = weyl_batch(space, as_points(z, space.n)[:1], method=method)[0]

    diagnostics = []
    tail = weyl_tail(space, W)
    if tail > tail_tolerance:
        message = (
            f'W_z at |z|={np.linalg.norm(z):.3g} leaks {tail:.2e} of the'
            f' leading block out of degree {space.N}.'
        )
        diagnostics.append(message)
        warnings.warn(message, TruncationWarning, stacklevel=2)

    return OperatorMatrix(space, W, diagnostics=diagnostics)


def translate_op(space: TruncatedSpace, z, S: OperatorMatrix, *,
                 method: str = 'quadrature') -> OperatorMatrix:
    """The operator translate alpha_z(S) = W_z S W_z^*."""
    W = weyl(space, z, method=method)
    result = W @ S @ W.adjoint
    result.diagnostics.extend(W.diagnostics)
    return result


def parity(space: TruncatedSpace) -> OperatorMatrix:
    """The parity operator U f(z) = f(-z), diagonal with entries
    (-1)^|k|."""
    return diagonal(space, (-1.0) ** space.degrees)


def phi_op(space: TruncatedSpace) -> OperatorMatrix:
    """The rank-one projection Phi = k_0 (x) k_0 onto the constants."""
    _require_fock(space, 'phi_op()')
    return matrix_unit(space, 0, 0)


class BerezinFunction(Symbol):
    """A function on C^n computed from an operator, such as B(S)."""
    __slots__ = ('source',)

    def __init__(self, evaluator, *, source=None, sup_bound=None,
                 name='berezin', is_radial=False):
        super().__init__(
            evaluator,
            kind='custom',
            is_radial=is_radial,
            sup_bound=sup_bound,
            name=name
        )
        #: The operator or symbol this function was computed from.
        self.source = source


def berezin(space: TruncatedSpace, S: OperatorMatrix) -> BerezinFunction:
    """The Berezin transform B(S)(z) = <S k_z, k_z>."""
    _require_fock(space, 'berezin()')
    entries = S.entries

    def evaluator(points):
        v = normalized_kernel_coeffs(space, points)
        v = v.reshape(-1, space.dim)
        return np.einsum('mj,jk,mk->m', v.conj(), entries, v)

    return BerezinFunction(
        evaluator,
        source=S,
        sup_bound=op_norm_estimate(S),
        name='berezin'
    )


def berezin_symbol(space: TruncatedSpace, a: Symbol) -> BerezinFunction:
    """The Berezin transform of a symbol, B(a) = B(T_a)."""
    result = berezin(space, toeplitz(space, a))
    result.source = a
    result.name = f'berezin({a.name})'
    return result


def op_norm_estimate(S: OperatorMatrix) -> float:
    """Largest singular value."""
    entries = S.entries if isinstance(S, OperatorMatrix) else S
    return float(np.linalg.norm(entries, ord=2))


def trace(S: OperatorMatrix) -> complex:
    return complex(np.trace(S.entries))


def trace_norm(S: OperatorMatrix) -> float:
    """Sum of singular values, reported as a diagnostic only."""
    entries = S.entries if isinstance(S, OperatorMatrix) else S
    return float(np.linalg.norm(entries, ord='nuc'))


def block_norm(S, size: int = None) -> float:
    """Operator norm of the leading block of `S`."""
    if isinstance(S, OperatorMatrix):
        return op_norm_estimate(S.block(size))
    return op_norm_estimate(np.asarray(S)[:size, :size])


def weyl_closed_form(space: TruncatedSpace, z) -> OperatorMatrix:
    """W_z from the Laguerre formula for displacement matrix elements,
    without tail checks."""
    _require_fock(space, 'weyl_closed_form()')
    W = weyl_batch(space, as_points(z, space.n)[:1], method='laguerre')[0]
    return OperatorMatrix(space, W)
