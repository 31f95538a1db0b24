"""Exceptions and warnings raised by qhalab.

Every rejected input raises a subclass of :class:`QHAError`, which is itself
a :class:`ValueError` so callers that already guard against bad arguments keep
working. Conditions that only degrade accuracy are reported through
:mod:`warnings` using a subclass of :class:`QHAWarning`.
"""


class QHAError(ValueError):
    """Base class for all qhalab errors."""


class InvalidParameterError(QHAError):
    """A numeric parameter (dimension, degree, order, partition, dilation,
    schedule) is outside its admissible range."""


class DegreeOverflowError(QHAError):
    """A multi-index exceeds the truncation degree of the space."""


class RejectedSymbolError(QHAError):
    """A symbol produced non-finite values where it was evaluated."""


class NonUnitaryError(QHAError):
    """A group element was constructed from a matrix that is not unitary."""


class QuadratureError(QHAError):
    """A quadrature rule or integration box is too coarse for the requested
    accuracy."""


class DivisionError(QHAError):
    """Spectral division was attempted where the divisor is numerically
    zero.

    :param location: The frequency at which the smallest divisor was found.
    :param minimum: The modulus of the divisor at `location`.
    """
    def __init__(self, message, *, location=None, minimum=None):
        super().__init__(message)
        self.location = location
        self.minimum = minimum


class NotInvariantError(QHAError):
    """An operator expected to be group invariant is not.

    :param deviation: The largest deviation found while sampling the group.
    """
    def __init__(self, message, *, deviation=None):
        super().__init__(message)
        self.deviation = deviation


class ConfigError(QHAError):
    """A configuration value failed validation.

    :param field_path: Dotted path of the offending field, such as
                       ``space.N``.
    """
    def __init__(self, message, *, field_path=None):
        super().__init__(
            f'{field_path}: {message}' if field_path else message
        )
        self.field_path = field_path


class QHAWarning(UserWarning):
    """Base class for all qhalab warnings."""


class TruncationWarning(QHAWarning):
    """A translated operator leaks noticeably out of the truncated space."""


class UnboundedSymbolWarning(QHAWarning):
    """A symbol without a known sup bound was admitted."""


class AliasingWarning(QHAWarning):
    """A grid function carries spectral mass close to the Nyquist
    frequency."""
