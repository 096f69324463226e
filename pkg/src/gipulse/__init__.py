"""Ghost-imaging remote heart-rate toolkit: simulation, DGI, VMD-based extraction, Monte Carlo sweeps."""

__version__ = "0.1.0"

from .errors import DegenerateSignalError, EmptyReportError, GiPulseError, InvalidInputError
from .signal_core import HEART_BAND, FrequencyBand, Spectrum, TimeSeries

__all__ = [
    "DegenerateSignalError",
    "EmptyReportError",
    "FrequencyBand",
    "GiPulseError",
    "HEART_BAND",
    "InvalidInputError",
    "Spectrum",
    "TimeSeries",
    "__version__",
]
