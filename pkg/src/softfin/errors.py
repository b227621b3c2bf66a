"""
Exceptions raised by softfin.
Everything the lab raises on purpose derives from SoftfinError, so the CLI
can turn it into a one-line diagnostic.
"""

from typing import Any, Dict, Optional


class SoftfinError(Exception):
    """
    Base class for all lab errors.
    """


class ConfigurationError(SoftfinError, ValueError):
    """
    Raised when a network, setting or argument combination is inconsistent,
    e.g. an input shape that does not match a layer.
    """


class StaleTapeError(SoftfinError):
    """
    Raised when backward is called with a tape recorded before the network
    parameters last changed, or with a tape from an eval-mode forward.
    """


class NonFiniteError(SoftfinError):
    """
    Raised when a gradient or network output is NaN or infinite.
    """

    def __init__(self, message: str, layer: str = "", max_abs: float = float("nan")):
        super().__init__(message)
        self.layer = layer
        self.max_abs = max_abs


class PlantFault(SoftfinError):
    """
    Raised when the synthetic plant reaches a non-finite state.
    """

    def __init__(self, message: str, state: Optional[Dict[str, Any]] = None):
        details = f"{message} (state: {state})" if state else message
        super().__init__(details)
        self.state = state or {}


class DatasetError(SoftfinError):
    """
    Raised when a dataset file is malformed.
    """

    def __init__(self, message: str, path: str = "", line: int = 0):
        location = f"{path}:{line}: " if path else ""
        super().__init__(f"{location}{message}")
        self.path = path
        self.line = line


class InfeasibleBandError(SoftfinError, ValueError):
    """
    Raised when a warping band cannot connect both series ends.
    """


class TrainingDivergedError(SoftfinError):
    """
    Raised when a training loss blows up past the divergence threshold.
    """


class EvaluationError(SoftfinError):
    """
    Raised when an evaluation run cannot finish; carries what was recorded.
    """

    def __init__(self, message: str, partial_trace: Any = None):
        super().__init__(message)
        self.partial_trace = partial_trace
