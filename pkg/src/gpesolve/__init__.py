"""Gross-Pitaevskii ground states and dynamics on sine-spectral grids."""

from .errors import (
    BlowUpError,
    GPEError,
    InvalidInputError,
    NonConvergenceError,
    NonexistenceError,
    NumericalFailureError,
    UnsupportedDimensionError,
)
from .grid import Grid, discrete_norm, normalize, sine_forward, sine_inverse
from .model import DipoleParams, ModelParams, SpinOrbitParams, TrapParams

__version__ = "0.1.0"
