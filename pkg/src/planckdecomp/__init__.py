"""Decomposition of a thermal radiation mode's energy into dark, Planck,
binary-photon and photo-multiplet parts, with analytic and Monte Carlo checks."""

from .constants import MODERN, PAPER, SERIES_RTOL, PhysicalConstants, constants_by_name
from .params import (
    DARK,
    GAUSS,
    PLANCK,
    DomainError,
    Kind,
    ModeParams,
    MomentSummary,
    VariableFamily,
    binary,
    multiplet,
)

__version__ = "0.1.0"
