import logging
import itertools

import numpy as np
from scipy.special import gammaln, roots_hermite, roots_laguerre

from qhalab.backends import Backend, QuadratureRule

log = logging.getLogger(__name__)


def hermite_rule(order: int, dims: int, *, scale: float = 1.0):
    """Product Gauss-Hermite rule for the weight ``exp(-pi |x|^2 / scale^2)``
    on R^dims, normalised so the weight has unit mass.

    Returns real nodes of shape ``(order**dims, dims)`` and weights.
    """
    t, w = roots_hermite(order)
    x = t * scale / np.sqrt(np.pi)
    w = w / np.sqrt(np.pi)

    x = np.array(list(itertools.product(*(x,) * dims)))
    w = np.prod(np.array(list(itertools.product(*(w,) * dims))), axis=1)
    return x.reshape(-1, dims), w


def real_to_complex(x: np.ndarray) -> np.ndarray:
    """Pair the real coordinates (x1, y1, x2, y2, ...) into points of C^n."""
    return x[:, 0::2] + 1j * x[:, 1::2]


class FockBackend(Backend):
    """Gaussian measure ``exp(-pi |z|^2) dz`` on C^n.

    In each coordinate ``u = pi |z_j|^2`` turns the measure into
    ``exp(-u) du`` times uniform angles, so the rule is a product of
    Gauss-Laguerre nodes in u and an equispaced grid of ``2 * order``
    angles. Angular sums vanish exactly for every nonzero frequency below
    ``2 * order``, which keeps Toeplitz matrices of torus-invariant symbols
    diagonal without any masking.
    """
    DESCRIPTION = 'Fock space F^2(C^n) with Gaussian measure.'
    SPACE_KIND = 'fock'

    def default_order(self, n, N):
        # Symbols and translations need headroom beyond the Gram matrix.
        return 2 * N + 8 if n == 1 else N + 4

    def build_quadrature(self, n, N, order):
        u, wu = roots_laguerre(order)
        radius = np.sqrt(u / np.pi)
        angles = 2 * np.pi * np.arange(2 * order) / (2 * order)

        # One coordinate: every radius paired with every angle.
        ring = (radius[:, None] * np.exp(1j * angles)[None, :]).ravel()
        ring_weights = np.repeat(wu / (2 * order), len(angles))

        nodes = np.array(list(itertools.product(ring, repeat=n)))
        weights = np.prod(
            np.array(list(itertools.product(ring_weights, repeat=n))),
            axis=1
        )
        log.debug('Fock quadrature n=%d order=%d nodes=%d', n, order,
                  len(weights))
        return QuadratureRule(
            nodes=nodes.reshape(-1, n), weights=weights, order=order
        )

    def basis_norms(self, exponents):
        exponents = np.asarray(exponents)
        degree = exponents.sum(axis=1)
        return np.exp(0.5 * (
            degree * np.log(np.pi)
            - gammaln(exponents + 1).sum(axis=1)
        ))

    def contains(self, points):
        return np.ones(len(points), dtype=bool)
