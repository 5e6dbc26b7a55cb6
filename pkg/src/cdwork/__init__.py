"""Counterdiabatic driving of closed quantum systems: work, excess work and speed limits."""

__version__ = "0.1.0"

from .counterdiabatic import CDConvention, synthesize_h1, total_hamiltonian
from .energetics import (excess_work_closed_form_lz, time_average, time_averaged_costs,
                         work_decomposition, work_series)
from .errors import (CDWorkError, ConfigInvalid, DegenerateSpectrum, DimensionMismatch,
                     FigureCheckFailed, InitialNotEigenstate, NonUnitaryStep, NotConverged,
                     NotHermitian, NumericalError, OutOfRange, UnknownPreset, ZeroDenominator)
from .linalg import SpectralDecomposition, eigendecompose, jacobi_eigh
from .models import LandauZener, Protocol
from .propagation import (EvolutionRecord, adiabatic_reference, propagate,
                          transition_probabilities)
from .qsl import QSLReport, bures_angle, inequality_chain, qsl_report

__all__ = [
    "__version__",
    "CDConvention", "synthesize_h1", "total_hamiltonian",
    "excess_work_closed_form_lz", "time_average", "time_averaged_costs",
    "work_decomposition", "work_series",
    "CDWorkError", "ConfigInvalid", "DegenerateSpectrum", "DimensionMismatch",
    "FigureCheckFailed", "InitialNotEigenstate", "NonUnitaryStep", "NotConverged",
    "NotHermitian", "NumericalError", "OutOfRange", "UnknownPreset", "ZeroDenominator",
    "SpectralDecomposition", "eigendecompose", "jacobi_eigh",
    "LandauZener", "Protocol",
    "EvolutionRecord", "adiabatic_reference", "propagate", "transition_probabilities",
    "QSLReport", "bures_angle", "inequality_chain", "qsl_report",
]
