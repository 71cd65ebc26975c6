# core/errors.py
"""
Exception hierarchy shared by the library and the workbench CLI
"""

from typing import Any, Dict, Optional


class WorkbenchError(Exception):
    """Base class for every error raised by the workbench"""


class DimensionMismatchError(WorkbenchError, ValueError):
    """Operators or states live on different spaces"""


class InvalidParameterError(WorkbenchError, ValueError):
    """A model or task parameter is outside its allowed range"""


class ExceptionalPointError(InvalidParameterError):
    """Parameters sit exactly on an exceptional point of a closed-form oracle"""


class CapExceededError(WorkbenchError, ValueError):
    """A requested dimension is above the configured cap"""


class ConfigError(WorkbenchError, ValueError):
    """Sweep configuration could not be parsed or validated"""

    def __init__(self, message: str, source: Optional[str] = None, line: Optional[int] = None):
        self.source = source
        self.line = line
        if source and line is not None:
            message = f"{source}:{line}: {message}"
        elif source:
            message = f"{source}: {message}"
        super().__init__(message)


class NumericalFailure(WorkbenchError, RuntimeError):
    """A numerical routine failed or produced output violating its invariants"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        if self.diagnostics:
            details = ", ".join(f"{k}={v}" for k, v in sorted(self.diagnostics.items()))
            message = f"{message} ({details})"
        super().__init__(message)


class DegenerateSteadyStateError(NumericalFailure):
    """More than one zero mode: the stationary state is not unique"""
