"""Exception hierarchy shared across the package."""


class PcboError(Exception):
    """Base class for all package-specific errors."""


class InputError(PcboError, ValueError):
    """Invalid argument values (dimension mismatches, bad counts, ...)."""


class DimensionMismatchError(InputError):
    """Points of incompatible dimension were combined."""


class NumericalError(PcboError, RuntimeError):
    """A numerical procedure failed (factorization, non-finite values)."""


class CapacityError(PcboError, RuntimeError):
    """A requested computation would exceed a configured size cap."""


class ConfigError(PcboError, ValueError):
    """A configuration document is malformed or inconsistent."""


class SequencingError(PcboError, RuntimeError):
    """Ask-tell protocol violation (suggest/observe called out of order)."""


class GenerationError(PcboError, RuntimeError):
    """Random objective generation failed (rejection budget exhausted)."""


class IngestError(PcboError, ValueError):
    """A data table could not be parsed."""
