"""Numerical zero-free evidence for holomorphic functions on truncated half-strips."""

__version__ = "0.1.0"

from .argprinciple import ZeroBox, count_zeros, locate_zeros, winding_number
from .boundary import Classification, DecayModel, Part, StripRegion, build_boundary, decay_check, sign_scan
from .complexcore import HolomorphicFunction
from .specialfns import CATALOG, get_function

__all__ = [
    "CATALOG",
    "Classification",
    "DecayModel",
    "HolomorphicFunction",
    "Part",
    "StripRegion",
    "ZeroBox",
    "build_boundary",
    "count_zeros",
    "decay_check",
    "get_function",
    "locate_zeros",
    "sign_scan",
    "winding_number",
]
