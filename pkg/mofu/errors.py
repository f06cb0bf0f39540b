"""
Exceptions raised by the mofu library.

Saturation and clipping are reported as flags on results, never raised.
"""

from typing import Optional


class MofuError(Exception):
    """Base class for every error raised by the library"""


class InvalidParamsError(MofuError):
    """Parameter set violates its invariants"""


class OutOfDomainError(MofuError):
    """Value outside the domain of the kinematic model"""

    def __init__(self, message: str, value: Optional[float] = None):
        super().__init__(message)
        self.value = value

    def __reduce__(self):
        return type(self), (str(self), self.value)


class InvalidConditionError(MofuError):
    """Unknown motion condition or an invalid robot count for it"""


class EmptyDatasetError(MofuError):
    """Operation needs at least one measurement sample"""


class ConfigError(MofuError):
    """Configuration file or override could not be applied"""


class DataFileError(MofuError):
    """Malformed input file; carries the path and line number"""

    def __init__(self, path, message: str, line: Optional[int] = None):
        self.path = str(path)
        self.line = line
        self.message = message
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")

    def __reduce__(self):
        return type(self), (self.path, self.message, self.line)


class SimulationError(MofuError):
    """A simulation step failed; carries the script time of the failure"""

    def __init__(self, t: float, cause: Exception):
        super().__init__(f"t={t:.3f}s: {cause}")
        self.t = t
        self.cause = cause

    def __reduce__(self):
        return type(self), (self.t, self.cause)
