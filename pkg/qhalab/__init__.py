import json
from typing import TextIO

from qhalab.errors import (
    QHAError,
    InvalidParameterError,
    DegreeOverflowError,
    RejectedSymbolError,
    NonUnitaryError,
    QuadratureError,
    DivisionError,
    NotInvariantError,
    ConfigError,
    QHAWarning,
    TruncationWarning,
    UnboundedSymbolWarning,
    AliasingWarning
)
from qhalab.space import TruncatedSpace, basis_eval, kernel
from qhalab.symbols import Symbol, from_name, registry
from qhalab.operators import (
    OperatorMatrix,
    berezin,
    phi_op,
    toeplitz,
    weyl
)
from qhalab.grid import GridFunction, SpectralGrid
from qhalab.conv import conv_ff, conv_fo, conv_oo, conv_symbol_op
from qhalab.groups import (
    GroupElement,
    Torus,
    Translations,
    FullUnitary,
    QuasiRadialBlocks,
    FiniteSet,
    conv_g_op,
    conv_g_symbol,
    radialize
)
from qhalab.wiener import (
    approx_identity,
    sot_toeplitz_approximation,
    wiener_divide
)
from qhalab.bergman import bergman_toeplitz, quasi_radialize
from qhalab.config import RunConfig, load_config
from qhalab.report import Report

# Shaddup *all* the linters complaining about unused imports.
_ALL_IMPORTS = [
    QHAError,
    InvalidParameterError,
    DegreeOverflowError,
    RejectedSymbolError,
    NonUnitaryError,
    QuadratureError,
    DivisionError,
    NotInvariantError,
    ConfigError,
    QHAWarning,
    TruncationWarning,
    UnboundedSymbolWarning,
    AliasingWarning,
    TruncatedSpace,
    basis_eval,
    kernel,
    Symbol,
    from_name,
    registry,
    berezin,
    phi_op,
    toeplitz,
    weyl,
    SpectralGrid,
    conv_ff,
    conv_fo,
    conv_oo,
    conv_symbol_op,
    GroupElement,
    Torus,
    Translations,
    FullUnitary,
    QuasiRadialBlocks,
    FiniteSet,
    conv_g_op,
    conv_g_symbol,
    radialize,
    approx_identity,
    sot_toeplitz_approximation,
    wiener_divide,
    bergman_toeplitz,
    quasi_radialize,
    RunConfig,
    load_config,
    Report
]


def load(f: TextIO, *, space: TruncatedSpace = None):
    """Read an :class:`OperatorMatrix` or :class:`GridFunction` from its JSON
    envelope.

    :param f: Any file-like object providing `read()`.
    :param space: Space for operator envelopes. [default: the space named by
                  the envelope]
    """
    return loads(f.read(), space=space)


def loads(content: str, *, space: TruncatedSpace = None):
    """Read an :class:`OperatorMatrix` or :class:`GridFunction` from a JSON
    string.

    >>> S = loads(dumps(phi_op(TruncatedSpace(1, 4))))
    >>> complex(S.entries[0, 0])
    (1+0j)
    """
    data = json.loads(content)
    if 'box_radius' in data:
        return GridFunction.from_dict(data)
    return OperatorMatrix.from_dict(data, space=space)


def dump(value, f: TextIO):
    """Write the JSON envelope of an :class:`OperatorMatrix` or
    :class:`GridFunction` to the file-like object `f`."""
    f.write(dumps(value))


def dumps(value) -> str:
    return json.dumps(value.to_dict())
