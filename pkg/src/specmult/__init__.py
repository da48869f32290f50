"""Fourier multipliers relative to an elliptic reference operator.

Backends: the flat torus T^n (n = 1, 2, 3) and the group SU(2).
"""

__version__ = "0.1.0"

from .linalg import ConvergenceError, op_norm, schatten_q, svd
from .manifold import build_quadrature, enumerate_partition, parse_manifold
from .fourier import FourierCoefficients, GridFunction, forward, inverse
from .symbol import (
    Symbol,
    apply,
    check_invariance,
    compose,
    extract,
    from_spectral_function,
    l2_bound,
    power_symbol,
    schatten,
    sobolev_order,
    trace_formula,
)

__all__ = [
    "__version__",
    "ConvergenceError",
    "svd",
    "schatten_q",
    "op_norm",
    "parse_manifold",
    "enumerate_partition",
    "build_quadrature",
    "FourierCoefficients",
    "GridFunction",
    "forward",
    "inverse",
    "Symbol",
    "apply",
    "extract",
    "check_invariance",
    "compose",
    "from_spectral_function",
    "power_symbol",
    "l2_bound",
    "schatten",
    "trace_formula",
    "sobolev_order",
]
