import logging
import itertools
from math import factorial

import numpy as np
from scipy.special import gammaln, roots_jacobi

from qhalab.backends import Backend, QuadratureRule

log = logging.getLogger(__name__)


class BergmanBackend(Backend):
    """Normalised volume measure dV on the unit ball of C^n.

    Writing s_j = |z_j|^2, dV becomes ``n! ds`` on the simplex
    ``sum(s) <= 1`` times uniform angles. The simplex is collapsed onto the
    unit cube by ``s_j = (1 - u_1)...(1 - u_{j-1}) u_j``, whose Jacobian
    ``prod (1 - u_j)^(n - j)`` is absorbed into Gauss-Jacobi weights.
    Angles use an equispaced grid of ``2 * order`` points per coordinate.
    """
    DESCRIPTION = 'Bergman space A^2(B^n) with normalised volume measure.'
    SPACE_KIND = 'bergman'

    def default_order(self, n, N):
        return 64 if n == 1 else N + 4

    def build_quadrature(self, n, N, order):
        radial = []
        for j in range(1, n + 1):
            alpha = n - j
            x, w = roots_jacobi(order, alpha, 0)
            radial.append(((1 + x) / 2, w * 2.0 ** (-alpha - 1)))

        angles = 2 * np.pi * np.arange(2 * order) / (2 * order)
        angle_weight = (1.0 / (2 * order)) ** n

        u = np.array(list(itertools.product(*(r[0] for r in radial))))
        wu = np.prod(
            np.array(list(itertools.product(*(r[1] for r in radial)))),
            axis=1
        ) * factorial(n)
        u = u.reshape(-1, n)

        s = np.empty_like(u)
        remaining = np.ones(len(u))
        for j in range(n):
            s[:, j] = remaining * u[:, j]
            remaining = remaining * (1 - u[:, j])

        theta = np.array(list(itertools.product(*(angles,) * n)))
        theta = theta.reshape(-1, n)

        nodes = (
            np.sqrt(s)[:, None, :] * np.exp(1j * theta)[None, :, :]
        ).reshape(-1, n)
        weights = np.repeat(wu, len(theta)) * angle_weight

        log.debug(
            'Bergman quadrature n=%d order=%d nodes=%d',
            n, order, len(weights)
        )
        return QuadratureRule(nodes=nodes, weights=weights, order=order)

    def basis_norms(self, exponents):
        exponents = np.asarray(exponents)
        n = exponents.shape[1]
        degree = exponents.sum(axis=1)
        return np.exp(0.5 * (
            gammaln(n + degree + 1)
            - gammaln(n + 1)
            - gammaln(exponents + 1).sum(axis=1)
        ))

    def contains(self, points):
        return np.linalg.norm(points, axis=1) < 1
