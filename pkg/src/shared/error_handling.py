"""Exception hierarchy and structured error logging."""

import logging
from datetime import datetime, timezone
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)


class WalkError(Exception):
    """Base exception for all toolkit errors."""
    pass


class ParameterError(WalkError, ValueError):
    """Exception raised when a parameter lies outside its admitted range."""
    pass


class DimensionMismatchError(ParameterError):
    """Exception raised when coin, walk or mask dimensions disagree."""
    pass


class NormalizationError(ParameterError):
    """Exception raised for zero or non-normalized coin and walk states."""
    pass


class SpectralError(WalkError):
    """Exception raised when a spectral quantity cannot be determined."""
    pass


class ConvergenceError(SpectralError):
    """Exception raised when an iterative or dense eigen-solve fails to converge."""

    def __init__(
        self,
        message: str,
        residual: Optional[float] = None,
        iterations: Optional[int] = None
    ):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class FitError(WalkError, ValueError):
    """Exception raised for fit windows that are too short or contain zeros."""
    pass


class TrappingError(WalkError):
    """Exception raised when stationary-state construction fails its checks."""
    pass


class PercolationError(WalkError):
    """Exception raised for unsupported percolation setups."""
    pass


class NumericalFaultError(WalkError):
    """Exception raised when a density matrix loses hermiticity or positivity."""
    pass


class ErrorLogger:
    """
    Structured error logger with component tracking.

    Logs errors with timestamp, component name, error type and the
    numerical context (parameters, residuals) attached by the caller.
    """

    def __init__(self, component_name: str):
        """
        Initialize error logger.

        Args:
            component_name: Name of the component
        """
        self.component_name = component_name
        self.logger = logging.getLogger(component_name)

    def log_error(
        self,
        error: Exception,
        context: Optional[Dict[str, Any]] = None,
        level: int = logging.ERROR
    ):
        """
        Log error with structured format.

        Args:
            error: Exception to log
            context: Additional context information
            level: Logging level
        """
        error_data = {
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'component': self.component_name,
            'error_type': type(error).__name__,
            'error_message': str(error),
        }

        residual = getattr(error, 'residual', None)
        if residual is not None:
            error_data['residual'] = residual

        if context:
            error_data['context'] = context

        self.logger.log(
            level,
            f"Error in {self.component_name}: {error}",
            exc_info=level >= logging.ERROR,
            extra={'extra_fields': error_data}
        )

    def log_warning(
        self,
        message: str,
        context: Optional[Dict[str, Any]] = None
    ):
        """
        Log warning with structured format.

        Args:
            message: Warning message
            context: Additional context information
        """
        warning_data = {
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'component': self.component_name,
            'message': message,
        }

        if context:
            warning_data['context'] = context

        self.logger.warning(
            message,
            extra={'extra_fields': warning_data}
        )
