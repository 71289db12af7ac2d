"""mpada: multi-port time-series S-parameter acquisition with simulated hardware."""

from .errors import (AcquisitionError, AnalysisError, ConfigError,
                     InstrumentError, InstrumentTimeout, MpadaError,
                     PlanValidationError, SamplingError, ScpiParseError,
                     StorageError)
from .vna import ComplexTrace, FrequencyGrid, VnaClient

__version__ = "0.1.0"

__all__ = [
    "AcquisitionError", "AnalysisError", "ComplexTrace", "ConfigError",
    "FrequencyGrid", "InstrumentError", "InstrumentTimeout", "MpadaError",
    "PlanValidationError", "SamplingError", "ScpiParseError", "StorageError",
    "VnaClient", "__version__",
]
