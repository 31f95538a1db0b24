"""Toeplitz operators on the Bergman space of the unit ball and the
quasi-radial projection.

For a partition n = n_1 + ... + n_k, quasi-radialization averages an
operator over the block-diagonal unitaries U(n_1) x ... x U(n_k). It is a
norm-contractive projection that maps T_a to T_{QRad(a)}, so the best
quasi-radial Toeplitz approximant of a quasi-radial operator is never worse
than the best general one.
"""
import logging
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from qhalab.errors import (
    InvalidParameterError,
    NotInvariantError,
    RejectedSymbolError
)
from qhalab.groups import (
    QuasiRadialBlocks,
    conv_g_symbol,
    is_invariant,
    schur_average
)
from qhalab.operators import OperatorMatrix, op_norm_estimate, toeplitz
from qhalab.space import TruncatedSpace
from qhalab.symbols import Symbol

log = logging.getLogger(__name__)

#: Points sampled on the unit sphere when screening symbols for
#: singularities on the closed ball.
BOUNDARY_SAMPLES = 256


def _require_bergman(space: TruncatedSpace, what: str):
    if space.space_kind != 'bergman':
        raise InvalidParameterError(
            f'{what} expects a Bergman space, got {space!r}.'
        )


def _sphere_points(n: int, count: int) -> np.ndarray:
    rng = np.random.default_rng(0)
    raw = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return raw / np.linalg.norm(raw, axis=1)[:, None]


def bergman_toeplitz(space: TruncatedSpace, a: Symbol, *,
                     order: int = None) -> OperatorMatrix:
    """T_a on a truncated Bergman space.

    :raises RejectedSymbolError: `a` is not finite on the quadrature nodes
                                 or on sampled points of the unit sphere.
    """
    _require_bergman(space, 'bergman_toeplitz()')
    boundary = _sphere_points(space.n, BOUNDARY_SAMPLES)
    with np.errstate(all='ignore'):
        values = a(boundary)
    if not np.all(np.isfinite(values)):
        raise RejectedSymbolError(
            f'Symbol {a.name!r} is singular on the closed unit ball.'
        )
    with warnings.catch_warnings():
        # The ball is bounded, so polynomial symbols are bounded on it.
        warnings.simplefilter('ignore')
        return toeplitz(space, a, order=order)


def quasi_radialize(space: TruncatedSpace, S: OperatorMatrix,
                    partition: Sequence[int]) -> OperatorMatrix:
    """The average of S over U(n_1) x ... x U(n_k).

    Works on any truncated space whose measure is invariant under unitary
    rotations, and coincides with
    ``groups.radialize(space, S, QuasiRadialBlocks(partition))``.

    :raises InvalidParameterError: `partition` does not sum to n.
    """
    return schur_average(space, S, partition)


def quasi_radial_symbol(a: Symbol, partition: Sequence[int], *,
                        angle_grid: int = 32) -> Symbol:
    """QRad(a), the average of a over the block unitaries."""
    return conv_g_symbol(
        None, a, QuasiRadialBlocks(partition, angle_grid=angle_grid)
    )


@dataclass
class ContractionRow:
    symbol: str
    #: ``||S - T_a||``.
    general: float
    #: ``||S - T_{QRad(a)}||``.
    quasi_radial: float
    tolerance: float

    @property
    def holds(self) -> bool:
        return self.quasi_radial <= self.general + self.tolerance

    def to_dict(self) -> Dict:
        return {
            'symbol': self.symbol,
            'general': self.general,
            'quasi_radial': self.quasi_radial,
            'holds': self.holds
        }


@dataclass
class DensityReport:
    """Outcome of :func:`density_contraction_check`.

    Norms are operator norms of the truncations, standing in for norms on
    the full space.
    """
    partition: tuple
    rows: List[ContractionRow] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return all(row.holds for row in self.rows)

    @property
    def worst_excess(self) -> float:
        """Largest ``||S - T_{QRad a}|| - ||S - T_a||``."""
        return max(
            (row.quasi_radial - row.general for row in self.rows),
            default=float('-inf')
        )

    def to_dict(self) -> Dict:
        return {
            'partition': list(self.partition),
            'holds': self.holds,
            'rows': [row.to_dict() for row in self.rows]
        }


def density_contraction_check(space: TruncatedSpace, S_target: OperatorMatrix,
                              a_candidates: Sequence[Symbol],
                              partition: Sequence[int], *,
                              tol: float = 1e-8) -> DensityReport:
    """Compare ``||S - T_a||`` with ``||S - T_{QRad(a)}||`` for each
    candidate symbol.

    :raises NotInvariantError: `S_target` is not quasi-radial within `tol`.
    """
    group = QuasiRadialBlocks(partition)
    invariance = is_invariant(S_target, group, tol=tol, size=space.dim)
    if not invariance:
        raise NotInvariantError(
            f'Target operator deviates from quasi-radial by'
            f' {invariance.deviation:.3e}.',
            deviation=invariance.deviation
        )

    report = DensityReport(partition=tuple(partition))
    for a in a_candidates:
        T = _toeplitz(space, a)
        T_qrad = _toeplitz(space, quasi_radial_symbol(a, partition))
        report.rows.append(ContractionRow(
            symbol=a.name,
            general=op_norm_estimate(S_target - T),
            quasi_radial=op_norm_estimate(S_target - T_qrad),
            tolerance=tol
        ))
    log.debug('density_contraction_check: %d candidates, holds=%s',
              len(report.rows), report.holds)
    return report


def _toeplitz(space, a):
    if space.space_kind == 'bergman':
        return bergman_toeplitz(space, a)
    return toeplitz(space, a)
