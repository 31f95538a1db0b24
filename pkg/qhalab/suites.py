"""Check suites and convergence studies.

Every check is a small function registered with :func:`check`. It receives
a :class:`Context` built from a :class:`~qhalab.config.RunConfig` and
returns the measured error, an :class:`Outcome`, or ``None`` when it does
not apply to the configured space. Checks parametrised with ``over`` run
once per item of the named context attribute.

Checks run in registration order. Warnings raised inside a check become
diagnostics of its record, and exceptions become failed records; the run
always continues.
"""
import logging
import time
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from qhalab.bergman import (
    bergman_toeplitz,
    density_contraction_check,
    quasi_radial_symbol,
    quasi_radialize
)
from qhalab.config import RunConfig
from qhalab.conv import (
    conv_ff,
    conv_fo,
    conv_oo,
    conv_symbol_op,
    ConvQuadrature,
    is_regular_function,
    is_regular_operator
)
from qhalab.errors import InvalidParameterError
from qhalab.grid import GridFunction
from qhalab.groups import (
    QuasiRadialBlocks,
    act_symbol,
    conv_g_op,
    conv_g_symbol,
    density_values,
    is_invariant,
    is_invariant_symbol,
    proj_rep,
    radialize,
    trigonometric_density
)
from qhalab.operators import (
    OperatorMatrix,
    berezin,
    matrix_unit,
    op_norm_estimate,
    phi_op,
    toeplitz,
    trace_norm,
    weyl_batch
)
from qhalab.report import ErrorTable, Report
from qhalab.space import (
    TruncatedSpace,
    basis_eval,
    kernel,
    normalized_kernel_coeffs
)
from qhalab.symbols import (
    dilated_gaussian,
    from_name,
    gaussian,
    phi,
    plane_wave,
    random_polynomial
)
from qhalab.wiener import (
    PROFILE_VERSION,
    angular_variation,
    approx_identity,
    approx_identity_sot_check,
    division_residual,
    sot_toeplitz_approximation,
    wiener_divide
)

log = logging.getLogger(__name__)

#: Suites in the order ``all`` runs them.
SUITES = ('core', 'conv', 'groups', 'wiener', 'bergman')

#: Convergence studies.
STUDIES = ('sot', 'approx_identity', 'truncation')

#: Truncation degrees of the truncation study.
TRUNCATION_DEGREES = (8, 12, 16, 20, 24)

#: Size of the leading block compared by the truncation study.
TRUNCATION_BLOCK = 8

#: Size of the leading block carrying random low-degree test operators.
LOW_DEGREE_BLOCK = 6


@dataclass
class Outcome:
    """A measured error, optionally with its own tolerance."""
    error: float
    #: Overrides the check's configured tolerance.
    tolerance: Optional[float] = None
    diagnostics: List[str] = field(default_factory=list)


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    #: The identity being checked, written out.
    anchor: str
    #: A :class:`~qhalab.config.ToleranceConfig` field, or a fixed number.
    tolerance: Union[str, float]
    run: Callable
    #: Name of a :class:`Context` attribute yielding ``(label, value)``.
    over: Optional[str] = None

    @property
    def identity(self) -> str:
        return f'{self.suite}.{self.name}'


#: Every registered check, in registration order.
CHECKS: List[Check] = []


def check(suite: str, name: str, *, anchor: str,
          tolerance: Union[str, float], over: str = None):
    """Register the decorated function as a check of `suite`."""
    def decorator(fn):
        CHECKS.append(Check(suite, name, anchor, tolerance, fn, over))
        return fn
    return decorator


class Context:
    """Objects shared by the checks of one run, built on first use."""
    def __init__(self, config: RunConfig):
        self.config = config
        self.seed = config.run.seed
        #: Toeplitz approximations by operator id, shared between checks.
        self.approximations = {}

    def rng(self, stream: int) -> np.random.Generator:
        """An independent generator for each `stream` under the run's
        seed."""
        return np.random.default_rng([self.seed, stream])

    def _space(self, kind: str) -> TruncatedSpace:
        if kind == self.config.space.space_kind:
            return self.space
        return self.config.build_space(space_kind=kind, order=None)

    @cached_property
    def space(self) -> TruncatedSpace:
        return self.config.build_space()

    @cached_property
    def fock(self) -> TruncatedSpace:
        return self._space('fock')

    @cached_property
    def bergman(self) -> TruncatedSpace:
        return self._space('bergman')

    @cached_property
    def grid(self):
        return self.config.build_grid()

    @cached_property
    def group(self):
        return self.config.build_group()

    @cached_property
    def partition(self) -> Tuple[int, ...]:
        return self.config.group.partition or (1,) * self.config.space.n

    @cached_property
    def density(self) -> Callable:
        n = self.config.space.n
        return trigonometric_density({
            (0,) * n: 1.0,
            (1,) + (0,) * (n - 1): 0.5
        })

    @cached_property
    def symbols(self):
        n = self.config.space.n
        return [(name, from_name(name, n)) for name in self.config.symbols.names]

    @cached_property
    def test_operators(self):
        return reference_operators(self.fock, self.rng(100))

    @cached_property
    def sot_operators(self):
        space = self.fock
        return [
            ('phi', phi_op(space)),
            ('e01', matrix_unit(space, 0, 1)),
            ('plane_wave', toeplitz(
                space, plane_wave(np.full(space.n, 0.5) / np.sqrt(space.n))
            ))
        ]

    @cached_property
    def schedule(self):
        return [(f't={t:g}', t) for t in self.config.schedule.t]


def reference_operators(space: TruncatedSpace, rng: np.random.Generator
                        ) -> List[Tuple[str, OperatorMatrix]]:
    """Operators supported on low degrees, whose translates are exact on
    the leading block of the truncation."""
    compressed = np.zeros((space.dim, space.dim), dtype=complex)
    size = min(4, space.dim)
    T = toeplitz(space, plane_wave(np.full(space.n, 0.5)))
    compressed[:size, :size] = T.entries[:size, :size]
    return [
        ('Phi', phi_op(space)),
        ('E01', matrix_unit(space, 0, 1)),
        ('E12', matrix_unit(space, 1, 2)),
        ('random_block', random_block(space, rng)),
        ('compressed_plane_wave', OperatorMatrix(space, compressed))
    ]


def random_block(space: TruncatedSpace, rng: np.random.Generator,
                 size: int = LOW_DEGREE_BLOCK) -> OperatorMatrix:
    """A complex Gaussian matrix on the leading `size` basis vectors."""
    size = min(size, space.dim)
    entries = np.zeros((space.dim, space.dim), dtype=complex)
    entries[:size, :size] = rng.standard_normal((size, size)) + \
        1j * rng.standard_normal((size, size))
    return OperatorMatrix(space, entries)


def random_matrix(space: TruncatedSpace,
                  rng: np.random.Generator) -> OperatorMatrix:
    return random_block(space, rng, space.dim)


def sample_points(rng: np.random.Generator, n: int, count: int,
                  radius: float) -> np.ndarray:
    """`count` points of C^n with norm at most `radius`."""
    raw = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    r = radius * rng.uniform(0, 1, count) ** (1 / (2 * n))
    return raw * (r / np.linalg.norm(raw, axis=1))[:, None]


def _leading(X: OperatorMatrix, Y: OperatorMatrix) -> float:
    return op_norm_estimate((X - Y).block())


def _max_abs(x, y) -> float:
    return float(np.max(np.abs(np.asarray(x) - np.asarray(y))))


# Truncated spaces.


@check('core', 'orthonormality', anchor='<e_j, e_k> = delta_jk',
       tolerance='orthonormality')
def _orthonormality(ctx):
    space = ctx.space
    return _max_abs(space.gram(), np.eye(space.dim))


@check('core', 'quadrature_mass', anchor='integral of 1 = 1',
       tolerance='orthonormality')
def _quadrature_mass(ctx):
    return abs(ctx.space.quadrature.mass - 1.0)


@check('core', 'reproducing', anchor='<f, K_z> = f(z)',
       tolerance='reproducing')
def _reproducing(ctx):
    space = ctx.space
    rng = ctx.rng(1)
    c = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    c /= np.linalg.norm(c)
    z = sample_points(rng, space.n, 16, 1.5 if space.is_fock else 0.9)

    rule = space.quadrature
    if space.is_fock and space.n == 1:
        K = np.exp(np.pi * rule.nodes @ z.conj().T)
    else:
        # The projected kernel; it pairs identically with polynomials of
        # degree at most N.
        K = space.nodes_basis @ space.basis(z).conj().T
    inner = (rule.weights * (space.nodes_basis @ c)) @ K.conj()
    return _max_abs(inner, space.basis(z) @ c)


@check('core', 'kernel_symmetry', anchor='K(z, w) = conj(K(w, z))',
       tolerance='projection')
def _kernel_symmetry(ctx):
    space = ctx.space
    if not space.is_fock:
        return None
    rng = ctx.rng(2)
    z = sample_points(rng, space.n, 16, 1.5)
    w = sample_points(rng, space.n, 16, 1.5)
    left = kernel(space, z, w)
    return float(np.max(
        np.abs(left - np.conj(kernel(space, w, z))) / np.abs(left)
    ))


@check('core', 'homogeneity', anchor='e_k(lambda z) = lambda^|k| e_k(z)',
       tolerance='projection')
def _homogeneity(ctx):
    space = ctx.space
    z = sample_points(ctx.rng(3), space.n, 16, 0.9)
    scale = 0.7 - 0.4j
    expected = space.basis(z) * scale ** space.degrees[None, :]
    return float(np.max(
        np.abs(space.basis(scale * z) - expected) /
        np.maximum(1.0, np.abs(expected))
    ))


@check('core', 'normalized_kernel', anchor='||k_z|| = 1 for |z| = 1',
       tolerance='kernel_tail')
def _normalized_kernel(ctx):
    space = ctx.space
    if not space.is_fock:
        return None
    theta = 2 * np.pi * np.arange(8) / 8
    z = np.zeros((8, space.n), dtype=complex)
    z[:, 0] = np.exp(1j * theta)
    coeffs = normalized_kernel_coeffs(space, z)
    return float(np.max(1 - np.linalg.norm(coeffs, axis=1)))


@check('core', 'bergman_basis', anchor='e_1(1) = sqrt(2) on A^2(B^1)',
       tolerance='projection')
def _bergman_basis(ctx):
    space = TruncatedSpace(1, 1, space_kind='bergman')
    return abs(basis_eval(space, (1,), 1.0) - np.sqrt(2))


# Operators.


@check('core', 'weyl_closed_form', anchor='Laguerre W_z = quadrature W_z',
       tolerance='reproducing')
def _weyl_closed_form(ctx):
    space = ctx.fock
    z = sample_points(ctx.rng(4), space.n, 4, 1.0)
    return _max_abs(
        weyl_batch(space, z, method='laguerre'),
        weyl_batch(space, z, method='quadrature')
    )


@check('core', 'toeplitz_self_adjoint', anchor='T_a = T_a^* for real a',
       tolerance='projection', over='symbols')
def _toeplitz_self_adjoint(ctx, a):
    space = ctx.fock
    if np.any(a(space.quadrature.nodes).imag):
        return None
    T = toeplitz(space, a)
    return _max_abs(T.entries, T.adjoint.entries)


@check('core', 'toeplitz_positive', anchor='a >= 0 implies T_a >= 0',
       tolerance='orthonormality', over='symbols')
def _toeplitz_positive(ctx, a):
    space = ctx.fock
    samples = a(space.quadrature.nodes)
    if np.any(samples.imag) or np.any(samples.real < 0):
        return None
    lowest = np.linalg.eigvalsh(toeplitz(space, a).entries)[0]
    return max(0.0, -float(lowest))


@check('core', 'radial_diagonal', anchor='T_a is diagonal for radial a',
       tolerance='projection', over='symbols')
def _radial_diagonal(ctx, a):
    if not a.is_radial:
        return None
    entries = toeplitz(ctx.fock, a).entries
    return float(np.linalg.norm(entries - np.diag(np.diag(entries))))


@check('core', 'berezin_of_toeplitz', anchor='B(T_a) = phi * a',
       tolerance='toeplitz', over='symbols')
def _berezin_of_toeplitz(ctx, a):
    space, grid = ctx.fock, ctx.grid
    smoothed = conv_ff(phi(), a, grid)
    points = grid.points()
    inside = np.nonzero(np.linalg.norm(points, axis=1) <= 1.0)[0][::7]
    expected = smoothed.values.reshape(-1)[inside]
    return _max_abs(berezin(space, toeplitz(space, a))(points[inside]),
                    expected)


@check('core', 'berezin_injective', anchor='B(S) = 0 implies S = 0',
       tolerance=0.0)
def _berezin_injective(ctx):
    space = ctx.fock
    rng = ctx.rng(5)
    z = sample_points(rng, space.n, 64, 1.5)
    vanishing = 0
    for _ in range(8):
        S = random_block(space, rng)
        if np.max(np.abs(berezin(space, S)(z))) <= 1e-12 * op_norm_estimate(S):
            vanishing += 1
    return float(vanishing)


# Convolutions.


@check('conv', 'toeplitz_as_convolution', anchor='T_a = a * Phi',
       tolerance='toeplitz', over='symbols')
def _toeplitz_as_convolution(ctx, a):
    space = ctx.fock
    size = min(8, space.dim)
    return op_norm_estimate(
        (conv_symbol_op(a, phi_op(space)) - toeplitz(space, a)).block(size)
    )


@check('conv', 'phi_phi', anchor='Phi * Phi = phi', tolerance='toeplitz')
def _phi_phi(ctx):
    space = ctx.fock
    z = sample_points(ctx.rng(6), space.n, 64, 1.5)
    Phi = phi_op(space)
    return _max_abs(conv_oo(Phi, Phi)(z), phi()(z))


@check('conv', 'phi_conv_is_berezin', anchor='Phi * S = B(S)',
       tolerance='berezin', over='test_operators')
def _phi_conv_is_berezin(ctx, S):
    space = ctx.fock
    z = sample_points(ctx.rng(7), space.n, 32, 1.5)
    return _max_abs(conv_oo(phi_op(space), S)(z), berezin(space, S)(z))


@check('conv', 'gaussian_conv_is_toeplitz', anchor='phi * S = T_{B(S)}',
       tolerance='identity', over='test_operators')
def _gaussian_conv_is_toeplitz(ctx, S):
    space = ctx.fock
    return _leading(conv_fo(phi(), S), toeplitz(space, berezin(space, S)))


@check('conv', 'associativity',
       anchor='psi1 * (psi2 * S) = (psi1 * psi2) * S = psi2 * (psi1 * S)',
       tolerance='identity')
def _associativity(ctx):
    space = ctx.fock
    n = space.n
    S = matrix_unit(space, 0, 1)
    psi1 = dilated_gaussian(0.5, n)
    psi2 = phi()
    # Gaussians convolve by adding squared scales.
    product = gaussian(np.sqrt(1.25), amplitude=1.25 ** -n)
    left = conv_fo(psi1, conv_fo(psi2, S))
    middle = conv_fo(product, S)
    right = conv_fo(psi2, conv_fo(psi1, S))
    return max(_leading(left, middle), _leading(middle, right))


@check('conv', 'covariance',
       anchor='alpha_z(psi * S) = (tau_z psi) * S = psi * alpha_z(S)',
       tolerance='identity')
def _covariance(ctx):
    space = ctx.fock
    z = np.full(space.n, 0.3 + 0.4j) / np.sqrt(space.n)
    W = OperatorMatrix(space, weyl_batch(space, z[None, :])[0])
    S = matrix_unit(space, 0, 1)
    psi = phi()
    moved = W @ conv_fo(psi, S) @ W.adjoint
    translated = conv_fo(psi.translate(z), S)
    inner = conv_fo(psi, W @ S @ W.adjoint)
    return max(_leading(moved, translated), _leading(translated, inner))


@check('conv', 'mixed_associativity', anchor='(A * B) * C = A * (B * C)',
       tolerance='identity')
def _mixed_associativity(ctx):
    space = ctx.fock
    size = min(4, space.dim)
    A = np.zeros(space.dim)
    C = np.zeros(space.dim)
    A[:size] = 0.5 ** np.arange(size)
    C[:size] = (0.2, 0.9, 0.1, 0.6)[:size]
    A = OperatorMatrix(space, np.diag(A))
    C = OperatorMatrix(space, np.diag(C))
    Phi = phi_op(space)
    quadrature = ConvQuadrature.hermite(space.n)
    left = conv_fo(conv_oo(A, Phi), C, quadrature=quadrature)
    right = conv_fo(conv_oo(Phi, C), A, quadrature=quadrature)
    return _leading(left, right)


@check('conv', 'norm_bound_operator', anchor='||psi * S|| <= ||psi||_1 ||S||',
       tolerance='norm_bound')
def _norm_bound_operator(ctx):
    S = random_block(ctx.fock, ctx.rng(8))
    return max(0.0, op_norm_estimate(conv_fo(phi(), S)) - op_norm_estimate(S))


@check('conv', 'norm_bound_function',
       anchor='||psi * a||_inf <= ||psi||_1 ||a||_inf',
       tolerance='norm_bound')
def _norm_bound_function(ctx):
    grid = ctx.grid
    psi = GridFunction.from_symbol(grid, phi())
    a = GridFunction.from_symbol(grid, plane_wave(np.full(grid.n, 0.5)))
    return max(0.0, conv_ff(psi, a, grid).sup() - psi.l1_norm() * a.sup())


@check('conv', 'norm_bound_trace', anchor='||a * S|| <= ||a||_inf ||S||_1',
       tolerance='norm_bound')
def _norm_bound_trace(ctx):
    space = ctx.fock
    a = plane_wave(np.full(space.n, 0.5))
    S = random_block(space, ctx.rng(9))
    result = conv_symbol_op(a, S)
    return max(0.0, op_norm_estimate(result) - a.sup_bound * trace_norm(S))


@check('conv', 'approximate_identity', anchor='psi_t * S -> S as t -> 0',
       tolerance='identity')
def _approximate_identity(ctx):
    space = ctx.fock
    S = matrix_unit(space, 0, 1)
    errors = [
        _leading(conv_fo(dilated_gaussian(t, space.n), S), S)
        for _, t in ctx.schedule
    ]
    return Outcome(errors[-1], tolerance=errors[0], diagnostics=[
        f'leading block error {e:.3e} at {label}'
        for (label, _), e in zip(ctx.schedule, errors)
    ])


@check('conv', 'regular_operator', anchor='Phi is regular', tolerance=0.0)
def _regular_operator(ctx):
    report = is_regular_operator(phi_op(ctx.fock), ctx.grid, radius=1.5)
    return Outcome(float(not report), diagnostics=[
        f'smallest |(Phi * Phi)^| = {report.minimum:.3e}'
    ])


# Subgroups.


def _density_mass(ctx) -> complex:
    elements, weights = ctx.group.haar()
    return complex(np.sum(weights * density_values(ctx.density, elements)))


@check('groups', 'toeplitz_covariance', anchor='alpha_g T_a = T_{g . a}',
       tolerance='identity', over='symbols')
def _toeplitz_covariance(ctx, a):
    space = ctx.fock
    T = toeplitz(space, a)
    errors = []
    for g in ctx.group.sample(4, ctx.seed):
        P = proj_rep(space, g)
        errors.append(_leading(P @ T @ P.adjoint,
                               toeplitz(space, act_symbol(g, a))))
    return max(errors)


@check('groups', 'convolution_of_toeplitz',
       anchor='psi *_G T_a = T_{psi *_G a}', tolerance='identity',
       over='symbols')
def _convolution_of_toeplitz(ctx, a):
    space, G = ctx.fock, ctx.group
    return _leading(
        conv_g_op(ctx.density, toeplitz(space, a), G),
        toeplitz(space, conv_g_symbol(ctx.density, a, G))
    )


@check('groups', 'radial_commutation.function_h',
       anchor='psi *_G (h * a) = h * (psi *_G a)', tolerance='identity')
def _commutation_function_h(ctx):
    G, grid = ctx.group, ctx.grid
    h = dilated_gaussian(0.5, G.n)
    a = from_name('shifted_gaussian', G.n)
    z = sample_points(ctx.rng(10), G.n, 16, 1.0)
    left = conv_g_symbol(ctx.density, conv_ff(h, a, grid).to_symbol(), G)
    right = conv_ff(h, conv_g_symbol(ctx.density, a, G), grid)
    return _max_abs(left(z), right(z))


@check('groups', 'radial_commutation.operator_h',
       anchor='psi *_G (h * S) = h * (psi *_G S)', tolerance='identity')
def _commutation_operator_h(ctx):
    G = ctx.group
    S = matrix_unit(ctx.fock, 0, 1)
    h = dilated_gaussian(0.5, G.n)
    return _leading(
        conv_g_op(ctx.density, conv_fo(h, S), G),
        conv_fo(h, conv_g_op(ctx.density, S, G))
    )


@check('groups', 'radial_commutation.function_H',
       anchor='psi *_G (Phi * a) = Phi * (psi *_G a)', tolerance='identity')
def _commutation_function_H(ctx):
    space, G = ctx.fock, ctx.group
    Phi = phi_op(space)
    a = from_name('shifted_gaussian', space.n)
    return _leading(
        conv_g_op(ctx.density, conv_symbol_op(a, Phi), G),
        conv_symbol_op(conv_g_symbol(ctx.density, a, G), Phi)
    )


@check('groups', 'radial_commutation.operator_H',
       anchor='psi *_G (Phi * S) = Phi * (psi *_G S)', tolerance='identity')
def _commutation_operator_H(ctx):
    space, G = ctx.fock, ctx.group
    Phi = phi_op(space)
    S = random_block(space, ctx.rng(11))
    z = sample_points(ctx.rng(12), space.n, 16, 1.0)
    left = conv_g_symbol(ctx.density, conv_oo(Phi, S), G)
    right = conv_oo(Phi, conv_g_op(ctx.density, S, G))
    return _max_abs(left(z), right(z))


@check('groups', 'invariance_criterion',
       anchor='psi *_G S = (integral of psi) S for invariant S',
       tolerance='identity')
def _invariance_criterion(ctx):
    space, G = ctx.fock, ctx.group
    if not G.COMPACT:
        return None
    S = radialize(space, random_block(space, ctx.rng(13)), G)
    return _leading(conv_g_op(ctx.density, S, G), _density_mass(ctx) * S)


@check('groups', 'invariance_criterion_function',
       anchor='a invariant iff psi *_G a = (integral of psi) a',
       tolerance=0.0)
def _invariance_criterion_function(ctx):
    G = ctx.group
    z = sample_points(ctx.rng(14), G.n, 64, 2.0)
    mass = _density_mass(ctx)
    tol = ctx.config.tolerances.get('density')
    mismatches, diagnostics = 0, []
    for name, a in ctx.symbols:
        invariant = bool(is_invariant_symbol(a, G, points=z, tol=tol,
                                             seed=ctx.seed))
        convolved = conv_g_symbol(ctx.density, a, G)(z)
        fixed = _max_abs(convolved, mass * a(z)) <= tol
        if invariant != fixed:
            mismatches += 1
            diagnostics.append(
                f'{name}: invariant={invariant}, fixed by convolution={fixed}'
            )
    return Outcome(float(mismatches), diagnostics=diagnostics)


@check('groups', 'invariance_preservation',
       anchor='Rad(h * S) = h * Rad(S) for radial h', tolerance='identity')
def _invariance_preservation(ctx):
    space, G = ctx.fock, ctx.group
    if not G.COMPACT:
        return None
    S = random_block(space, ctx.rng(15))
    h = dilated_gaussian(0.5, space.n)
    return _leading(
        radialize(space, conv_fo(h, S), G),
        conv_fo(h, radialize(space, S, G))
    )


@check('groups', 'invariance_preservation_symbol',
       anchor='a * Phi is invariant for invariant a', tolerance='identity')
def _invariance_preservation_symbol(ctx):
    space, G = ctx.fock, ctx.group
    if not G.COMPACT:
        return None
    deviation = 0.0
    for _, a in ctx.symbols:
        if not is_invariant_symbol(a, G, seed=ctx.seed):
            continue
        report = is_invariant(conv_symbol_op(a, phi_op(space)), G,
                              seed=ctx.seed)
        deviation = max(deviation, report.deviation)
    return deviation


@check('groups', 'injectivity_transfer',
       anchor='S invariant iff phi * S invariant', tolerance=0.0)
def _injectivity_transfer(ctx):
    space, G = ctx.fock, ctx.group
    if not G.COMPACT:
        return None
    rng = ctx.rng(16)
    tol = ctx.config.tolerances.get('identity')
    mismatches, diagnostics = 0, []
    for i in range(10):
        S = random_block(space, rng)
        if i % 2 == 0:
            S = radialize(space, S, G)
        direct = bool(is_invariant(S, G, tol=tol, seed=ctx.seed))
        smoothed = bool(is_invariant(conv_fo(phi(), S), G, tol=tol,
                                     seed=ctx.seed))
        if direct != smoothed:
            mismatches += 1
            diagnostics.append(
                f'instance {i}: S invariant={direct},'
                f' phi * S invariant={smoothed}'
            )
    return Outcome(float(mismatches), diagnostics=diagnostics)


@check('groups', 'radialize_idempotent', anchor='Rad(Rad S) = Rad S',
       tolerance='projection')
def _radialize_idempotent(ctx):
    space, G = ctx.fock, ctx.group
    if not G.COMPACT:
        return None
    R = radialize(space, random_matrix(space, ctx.rng(17)), G)
    return _max_abs(radialize(space, R, G).entries, R.entries)


@check('groups', 'radialize_idempotent_quadrature',
       anchor='Rad(Rad S) = Rad S on the angle grid', tolerance='contraction')
def _radialize_idempotent_quadrature(ctx):
    space, G = ctx.fock, ctx.group
    if G.KIND != 'torus':
        return None
    R = radialize(space, random_matrix(space, ctx.rng(18)), G,
                  method='quadrature')
    return _max_abs(
        radialize(space, R, G, method='quadrature').entries, R.entries
    )


@check('groups', 'radialize_contraction', anchor='||Rad S|| <= ||S||',
       tolerance='contraction')
def _radialize_contraction(ctx):
    space, G = ctx.fock, ctx.group
    if not G.COMPACT:
        return None
    S = random_matrix(space, ctx.rng(19))
    return max(0.0, op_norm_estimate(radialize(space, S, G)) -
               op_norm_estimate(S))


@check('groups', 'representation',
       anchor='pi(g1) pi(g2) pi((g1 g2)^-1) is a unimodular scalar',
       tolerance='representation')
def _representation(ctx):
    space, G = ctx.fock, ctx.group
    g1, g2 = G.sample(2, ctx.seed)
    product = proj_rep(space, g1) @ proj_rep(space, g2) @ \
        proj_rep(space, (g1 * g2).inverse())
    singular = np.linalg.svd(product.block(), compute_uv=False)
    return float(np.max(np.abs(singular - 1)))


# Wiener division and Toeplitz approximation.


@check('wiener', 'division_residual', anchor='phi * h_t = f_t',
       tolerance='wiener', over='schedule')
def _division_residual(ctx, t):
    f_t = approx_identity(t, ctx.grid)
    h_t = wiener_divide(f_t, phi(), ctx.grid)
    return division_residual(f_t, phi(), h_t)


@check('wiener', 'division_radiality', anchor='h_t is radial',
       tolerance='radiality', over='schedule')
def _division_radiality(ctx, t):
    f_t = approx_identity(t, ctx.grid)
    return angular_variation(wiener_divide(f_t, phi(), ctx.grid))


@check('wiener', 'regular_product', anchor='phi * phi is regular',
       tolerance=0.0)
def _regular_product(ctx):
    grid = ctx.grid
    report = is_regular_function(conv_ff(phi(), phi(), grid), grid,
                                 radius=1.5)
    return Outcome(float(not report), diagnostics=[
        f'smallest |(phi * phi)^| = {report.minimum:.3e}'
    ])


def _approximation(ctx, S):
    cache = ctx.approximations
    if id(S) not in cache:
        cache[id(S)] = sot_toeplitz_approximation(
            ctx.fock, S, ctx.config.schedule.t, grid=ctx.grid
        )
    return cache[id(S)]


def _stage_diagnostics(approximation) -> List[str]:
    diagnostics = []
    for stage in approximation.stages:
        diagnostics.extend(m for m in stage.diagnostics
                           if m not in diagnostics)
    return diagnostics


def _per_vector(table, value) -> str:
    errors = ', '.join(f'{e:.2e}' for e in table.errors(value))
    return f'{table.parameter}={value:g}: {errors}'


@check('wiener', 'pipeline_identity', anchor='f_t * S = T_{h_t * B(S)}',
       tolerance='identity', over='sot_operators')
def _pipeline_identity(ctx, S):
    approximation = _approximation(ctx, S)
    return Outcome(
        max(stage.identity_error for stage in approximation.stages),
        diagnostics=_stage_diagnostics(approximation)
    )


@check('wiener', 'sot_improves', anchor='T_{a_t} -> S strongly as t -> 0',
       tolerance=0.0, over='sot_operators')
def _sot_improves(ctx, S):
    # Columns S annihilates stay at rounding level along the schedule.
    table = _approximation(ctx, S).table
    floor = ctx.config.tolerances.get('projection')
    values = table.parameters
    return Outcome(float(not table.improves(floor=floor)), diagnostics=[
        _per_vector(table, values[0]), _per_vector(table, values[-1])
    ])


@check('wiener', 'sot_final', anchor='||(T_{a_t} - S) e_j|| is small',
       tolerance='sot', over='sot_operators')
def _sot_final(ctx, S):
    approximation = _approximation(ctx, S)
    table = approximation.table
    return Outcome(table.final, diagnostics=[
        _per_vector(table, table.parameters[-1]),
        *_stage_diagnostics(approximation)
    ])


# Bergman space and quasi-radialization.


@check('bergman', 'orthonormality', anchor='<e_j, e_k> = delta_jk on A^2',
       tolerance='orthonormality')
def _bergman_orthonormality(ctx):
    space = ctx.bergman
    return _max_abs(space.gram(), np.eye(space.dim))


@check('bergman', 'idempotent', anchor='QRad(QRad S) = QRad S',
       tolerance='projection')
def _qrad_idempotent(ctx):
    space, p = ctx.bergman, ctx.partition
    R = quasi_radialize(space, random_matrix(space, ctx.rng(20)), p)
    return _max_abs(quasi_radialize(space, R, p).entries, R.entries)


@check('bergman', 'contraction', anchor='||QRad X|| <= ||X||',
       tolerance='contraction')
def _qrad_contraction(ctx):
    space, p = ctx.bergman, ctx.partition
    rng = ctx.rng(21)
    excess = 0.0
    for _ in range(64):
        X = random_matrix(space, rng)
        excess = max(excess, op_norm_estimate(quasi_radialize(space, X, p)) -
                     op_norm_estimate(X))
    return excess


@check('bergman', 'intertwining', anchor='QRad S is quasi-radial',
       tolerance='density')
def _qrad_intertwining(ctx):
    space, p = ctx.bergman, ctx.partition
    R = quasi_radialize(space, random_matrix(space, ctx.rng(22)), p)
    return is_invariant(R, QuasiRadialBlocks(p), seed=ctx.seed,
                        size=space.dim).deviation


@check('bergman', 'fixed_points', anchor='QRad S = S iff S is quasi-radial',
       tolerance=0.0)
def _qrad_fixed_points(ctx):
    space, p = ctx.bergman, ctx.partition
    rng = ctx.rng(23)
    tol = ctx.config.tolerances.get('density')
    group = QuasiRadialBlocks(p)
    mismatches = 0
    for i in range(4):
        S = random_matrix(space, rng)
        if i % 2 == 0:
            S = quasi_radialize(space, S, p)
        fixed = _max_abs(quasi_radialize(space, S, p).entries,
                         S.entries) <= tol
        invariant = bool(is_invariant(S, group, tol=tol, seed=ctx.seed,
                                      size=space.dim))
        mismatches += fixed != invariant
    return float(mismatches)


def _symbol_average_outcome(ctx, error: float) -> Outcome:
    # Blocks larger than one average symbols by Monte Carlo.
    if all(size == 1 for size in ctx.partition):
        return Outcome(error)
    return Outcome(
        error,
        tolerance=10 / np.sqrt(QuasiRadialBlocks(ctx.partition).mc_samples),
        diagnostics=['symbol averaged by Monte Carlo']
    )


@check('bergman', 'toeplitz_commutes', anchor='QRad(T_a) = T_{QRad a}',
       tolerance='density')
def _qrad_toeplitz(ctx):
    space, p = ctx.bergman, ctx.partition
    a = random_polynomial(space.n, 3, seed=ctx.seed)
    error = _max_abs(
        quasi_radialize(space, bergman_toeplitz(space, a), p).entries,
        bergman_toeplitz(space, quasi_radial_symbol(a, p)).entries
    )
    return _symbol_average_outcome(ctx, error)


@check('bergman', 'density_contraction',
       anchor='||S - T_{QRad a}|| <= ||S - T_a|| for quasi-radial S',
       tolerance='density')
def _density_contraction(ctx):
    space, p = ctx.bergman, ctx.partition
    target = quasi_radialize(space, random_matrix(space, ctx.rng(24)), p)
    candidates = [
        random_polynomial(space.n, 3, seed=ctx.seed * 1000 + i)
        for i in range(64)
    ]
    report = density_contraction_check(
        space, target, candidates, p,
        tol=ctx.config.tolerances.get('density')
    )
    return _symbol_average_outcome(ctx, max(0.0, report.worst_excess))


@check('bergman', 'fock_parity',
       anchor='quasi_radialize = radialize over QuasiRadialBlocks on F^2',
       tolerance='projection')
def _fock_parity(ctx):
    space, p = ctx.fock, ctx.partition
    X = random_matrix(space, ctx.rng(25))
    return _max_abs(
        quasi_radialize(space, X, p).entries,
        radialize(space, X, QuasiRadialBlocks(p)).entries
    )


def _tolerance(config: RunConfig, tolerance) -> float:
    if isinstance(tolerance, str):
        return config.tolerances.get(tolerance)
    return float(tolerance)


def _items(ctx: Context, c: Check):
    if c.over is None:
        return [(None, None)]
    return getattr(ctx, c.over)


def _execute(report: Report, ctx: Context, c: Check, label, value):
    identity = c.identity if label is None else f'{c.identity}[{label}]'
    log.info('Checking %s', identity)
    started = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always')
        try:
            outcome = c.run(ctx) if label is None else c.run(ctx, value)
        except Exception as e:
            log.warning('%s failed with %s: %s', identity,
                        type(e).__name__, e)
            outcome = Outcome(float('nan'),
                              diagnostics=[f'{type(e).__name__}: {e}'])

    if outcome is None:
        log.debug('%s does not apply', identity)
        return
    if not isinstance(outcome, Outcome):
        outcome = Outcome(float(outcome))

    diagnostics = list(outcome.diagnostics)
    for w in caught:
        message = f'{w.category.__name__}: {w.message}'
        if message not in diagnostics:
            diagnostics.append(message)

    tolerance = outcome.tolerance
    if tolerance is None:
        tolerance = _tolerance(ctx.config, c.tolerance)
    record = report.record(identity, c.anchor, outcome.error, tolerance,
                           diagnostics)
    report.timing[identity] = time.perf_counter() - started
    if not record.passed:
        log.warning('%s failed: error %.3e, tolerance %.3e', identity,
                    record.error, record.tolerance)


def _environment(config: RunConfig):
    return {
        'config': config.to_dict(),
        'profile': PROFILE_VERSION,
        'seed': config.run.seed,
        'numpy': np.__version__
    }


def run_suite(config: RunConfig, suite: str) -> Report:
    """Run every check of `suite`, or of every suite for ``all``.

    :raises InvalidParameterError: Unknown suite name.
    """
    if suite != 'all' and suite not in SUITES:
        raise InvalidParameterError(
            f'Unknown suite {suite!r}, expected one of'
            f' {list(SUITES) + ["all"]}.'
        )
    selected = SUITES if suite == 'all' else (suite,)
    report = Report(suite=suite, environment=_environment(config))
    ctx = Context(config)

    for name in selected:
        for c in (c for c in CHECKS if c.suite == name):
            try:
                items = _items(ctx, c)
            except Exception as e:
                log.warning('%s: cannot build inputs: %s', c.identity, e)
                report.record(c.identity, c.anchor, float('nan'),
                              _tolerance(config, c.tolerance),
                              [f'{type(e).__name__}: {e}'])
                continue
            for label, value in items:
                _execute(report, ctx, c, label, value)

    if ctx.approximations:
        for label, S in ctx.sot_operators:
            if id(S) in ctx.approximations:
                table = ctx.approximations[id(S)].table
                table.name = f'sot_{label}'
                report.tables.append(table)

    log.info('Suite %s: %d records, %d failed', suite, len(report.records),
             len(report.failures))
    return report


def _kernel_table(config: RunConfig) -> ErrorTable:
    """Errors of three truncated identities against N.

    Index 0 is the partial kernel sum against exp(pi <w, z>), index 1 the
    norm deficit of k_z and index 2 is ``B(T_phi) = phi * phi``.
    """
    n = config.space.n
    rng = np.random.default_rng([config.run.seed, 200])
    z = sample_points(rng, n, 16, 1.5)
    w = sample_points(rng, n, 16, 1.5)
    boundary = np.zeros((8, n), dtype=complex)
    boundary[:, 0] = 1.5 * np.exp(2j * np.pi * np.arange(8) / 8)
    smoothed = 2.0 ** -n * np.exp(-np.pi * np.sum(np.abs(z) ** 2, axis=1) / 2)

    table = ErrorTable(name='truncation', parameter='N')
    for N in TRUNCATION_DEGREES:
        log.info('Kernel truncation at N=%d', N)
        space = TruncatedSpace(n, N)
        partial = np.sum(space.basis(w) * space.basis(z).conj(), axis=1)
        table.add(N, 0, _max_abs(partial, kernel(space, z, w)))
        norms = np.linalg.norm(normalized_kernel_coeffs(space, boundary),
                               axis=1)
        table.add(N, 1, float(np.max(1 - norms)))
        T = toeplitz(space, phi())
        table.add(N, 2, _max_abs(berezin(space, T)(z), smoothed))
    return table


def _identity_tables(config: RunConfig) -> List[Tuple[ErrorTable, str]]:
    """The convolution and Berezin identities of the conv suite against N,
    each paired with its tolerance name.

    Leading blocks have the fixed size :data:`TRUNCATION_BLOCK` so that every
    N compares the same entries.
    """
    n = config.space.n
    symbols = [from_name(name, n) for name in config.symbols.names]
    z = sample_points(np.random.default_rng([config.run.seed, 201]),
                      n, 32, 1.5)

    def block(X, Y):
        return op_norm_estimate((X - Y).block(TRUNCATION_BLOCK))

    as_convolution = ErrorTable('truncation_toeplitz_as_convolution', 'N')
    phi_phi = ErrorTable('truncation_phi_phi', 'N')
    phi_berezin = ErrorTable('truncation_phi_conv_is_berezin', 'N')
    gaussian_toeplitz = ErrorTable('truncation_gaussian_conv_is_toeplitz',
                                   'N')
    for N in TRUNCATION_DEGREES:
        log.info('Identity truncation at N=%d', N)
        space = config.build_space(N=N, space_kind='fock', order=None)
        Phi = phi_op(space)
        for i, a in enumerate(symbols):
            as_convolution.add(
                N, i, block(conv_symbol_op(a, Phi), toeplitz(space, a))
            )
        phi_phi.add(N, 0, _max_abs(conv_oo(Phi, Phi)(z), phi()(z)))
        # Same seed stream at every N, so the random block is shared.
        operators = reference_operators(
            space, np.random.default_rng([config.run.seed, 100])
        )
        for i, (_, S) in enumerate(operators):
            B = berezin(space, S)
            phi_berezin.add(N, i, _max_abs(conv_oo(Phi, S)(z), B(z)))
            gaussian_toeplitz.add(
                N, i, block(conv_fo(phi(), S), toeplitz(space, B))
            )
    return [
        (as_convolution, 'toeplitz'),
        (phi_phi, 'toeplitz'),
        (phi_berezin, 'berezin'),
        (gaussian_toeplitz, 'identity')
    ]


def _truncation_study(config: RunConfig, report: Report):
    """Tabulate every truncation table and record whether its errors shrink
    with N.

    Errors below the table's tolerance count as converged, so flat tables at
    quadrature level pass.
    """
    tables = [(_kernel_table(config), 'kernel_tail')]
    tables.extend(_identity_tables(config))
    for table, tolerance in tables:
        report.tables.append(table)
        floor = config.tolerances.get(tolerance)
        worst = ', '.join(
            f'N={N:g}: {table.worst(N):.2e}' for N in table.parameters
        )
        report.record(
            f'converge.{table.name}.monotone',
            f'{table.name} errors do not grow with N',
            float(not table.is_monotone(floor=floor)),
            0.0,
            [f'worst error {worst}', f'converged below {floor:.1e}']
        )


def run_convergence(config: RunConfig, study: str) -> Report:
    """Error tables of a convergence study.

    ``sot`` and ``approx_identity`` vary t along the configured schedule for
    Phi, E_01 and a plane-wave Toeplitz operator; ``truncation`` varies the
    truncation degree N.

    :raises InvalidParameterError: Unknown study, or an empty schedule.
    """
    if study not in STUDIES:
        raise InvalidParameterError(
            f'Unknown study {study!r}, expected one of {list(STUDIES)}.'
        )
    if study != 'truncation' and not config.schedule.t:
        raise InvalidParameterError('The t schedule is empty.')

    report = Report(suite=f'converge.{study}',
                    environment=_environment(config))
    started = time.perf_counter()
    if study == 'truncation':
        _truncation_study(config, report)
    else:
        ctx = Context(config)
        for label, S in ctx.sot_operators:
            log.info('%s study for %s', study, label)
            if study == 'sot':
                table = sot_toeplitz_approximation(
                    ctx.fock, S, config.schedule.t, grid=ctx.grid
                ).table
            else:
                table = approx_identity_sot_check(
                    S, config.schedule.t, grid=ctx.grid
                )
            table.name = f'{study}_{label}'
            report.tables.append(table)
    report.timing[study] = time.perf_counter() - started
    return report
