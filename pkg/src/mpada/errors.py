"""Exception hierarchy shared across the package."""


class MpadaError(Exception):
    """Base class for all errors raised by this package."""


class ScpiParseError(MpadaError):
    """Malformed SCPI message, block, or resource address."""


class ConfigError(MpadaError):
    """Invalid configuration document (pin map, sweep sequence, registry, plan)."""


class InstrumentError(MpadaError):
    """The instrument rejected a command or returned garbage."""


class InstrumentTimeout(InstrumentError):
    """No (complete) response within the configured timeout."""


class PlanValidationError(MpadaError):
    """Plan failed validation; carries the full list of violations."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class AcquisitionError(MpadaError):
    """Failure while executing an acquisition plan."""


class SamplingError(MpadaError):
    """A peripheral read failed (recorded, non-fatal to the session)."""


class StorageError(MpadaError):
    """File format violation on read or write."""


class AnalysisError(MpadaError):
    """Invalid input to an analysis pipeline."""
