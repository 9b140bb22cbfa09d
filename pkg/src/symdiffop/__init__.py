"""Calculus of symmetric polynomial-coefficient differential operators.

Exact structure transforms (raw <-> divergence form, operator powers,
hbar scaling, Weyl quantization) over the rationals, plus numerical
certificates at Hermite-truncation scale for positivity, operator
comparison and the self-adjointness norm criterion.
"""

from .opalg import DivOp, RawOp, adjoint, compose, is_symmetric, power
from .poly import NEG_INF, Poly, Rational, global_min
from .quantize import NcPoly, nc_star, quantize_divergence, weyl_lift
from .structure import (
    PowerDecomposition,
    StructureConstants,
    divergence_from_raw,
    power_div_coeffs,
    power_raw_coeffs,
    raw_from_divergence,
    scale_hbar,
    scaled_power_div,
    split_top,
    structure_constants,
)

__all__ = [
    "DivOp",
    "NcPoly",
    "NEG_INF",
    "Poly",
    "PowerDecomposition",
    "Rational",
    "RawOp",
    "StructureConstants",
    "adjoint",
    "compose",
    "divergence_from_raw",
    "global_min",
    "is_symmetric",
    "nc_star",
    "power",
    "power_div_coeffs",
    "power_raw_coeffs",
    "quantize_divergence",
    "raw_from_divergence",
    "scale_hbar",
    "scaled_power_div",
    "split_top",
    "structure_constants",
    "weyl_lift",
]

__version__ = "0.1.0"
