import numpy as np

from qhalab.backends import available_backends


def test_backends():
    """Ensure plugin-registered backends are present and valid."""
    backends = available_backends()

    # Make sure our default backends are available at least.
    assert 'fock' in backends
    assert 'bergman' in backends

    # Ensure required fields are available on every backend.
    for k, v in backends.items():
        assert v.DESCRIPTION is not None
        assert v.SPACE_KIND == k


def test_quadrature_mass():
    """Ensure every backend's rule integrates 1 to 1."""
    for backend in available_backends().values():
        rule = backend().build_quadrature(2, 3, 8)
        assert abs(rule.mass - 1) < 1e-12
        assert np.all(rule.weights > 0)
