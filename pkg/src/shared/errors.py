"""Error handling for entcut.

This module defines custom exceptions and error handling utilities.
It provides consistent error handling throughout the application.
"""

from typing import Any, Dict, List, Optional

from .logger import logger


class EntanglementError(Exception):
    """Base class for entcut-specific exceptions.

    Attributes:
        message: Error message
        context: Additional context about the error
        error_code: Unique error code for identification
    """

    default_code = "ENTCUT_ERROR"

    def __init__(
        self,
        message: str,
        context: Optional[Dict[str, Any]] = None,
        error_code: Optional[str] = None
    ) -> None:
        self.message = message
        self.context = context or {}
        self.error_code = error_code or self.default_code

        # Log the error
        logger.error(
            f"{type(self).__name__}: {message} | Code: {self.error_code} | Context: {self.context}"
        )

        super().__init__(self.message)


class InvalidArgumentError(EntanglementError):
    """Raised when an argument is outside an operation's precondition."""
    default_code = "INVALID_ARGUMENT"


class InvalidStateError(EntanglementError):
    """Raised when a matrix or vector is not a valid quantum state."""
    default_code = "INVALID_STATE"


class OutOfDomainError(EntanglementError):
    """Raised when a bound is evaluated outside its validity window."""
    default_code = "OUT_OF_DOMAIN"


class IllConditionedError(EntanglementError):
    """Raised when a matrix function is requested at a near-singular point."""
    default_code = "ILL_CONDITIONED"


class ResourceLimitError(EntanglementError):
    """Raised when a configured memory or dimension cap would be exceeded."""
    default_code = "CAP_EXCEEDED"


class BudgetViolationError(EntanglementError):
    """Raised when a state lies outside the mean-energy budget."""
    default_code = "BUDGET_VIOLATION"


class MeasureDispatchError(EntanglementError):
    """Raised when a measure is requested for a state it does not apply to."""
    default_code = "MEASURE_DISPATCH"


class StateFileError(EntanglementError):
    """Raised when a state or configuration file cannot be read or is invalid."""
    default_code = "STATE_FILE"


class ConstructionFailedError(EntanglementError):
    """Raised when no admissible construction exists within the truncation.

    Attributes:
        scan_log: One entry per candidate that was tried
    """
    default_code = "CONSTRUCTION_FAILED"

    def __init__(
        self,
        message: str,
        scan_log: Optional[List[Dict[str, Any]]] = None,
        context: Optional[Dict[str, Any]] = None,
        error_code: Optional[str] = None
    ) -> None:
        self.scan_log = scan_log or []
        context = dict(context or {})
        context.setdefault("candidates_tried", len(self.scan_log))
        super().__init__(message, context=context, error_code=error_code)


def handle_error(error: Exception) -> Dict[str, Any]:
    """Convert an exception into a standardized error response.

    Args:
        error: The exception to handle

    Returns:
        Dict containing error details
    """
    if isinstance(error, EntanglementError):
        response = {
            "error": error.message,
            "error_code": error.error_code,
            "context": error.context
        }
        if isinstance(error, ConstructionFailedError):
            response["scan_log"] = error.scan_log
        return response

    # Handle unexpected errors
    logger.exception("Unexpected error occurred")
    return {
        "error": "An unexpected error occurred",
        "error_code": "INTERNAL_ERROR",
        "context": {"type": str(type(error)), "message": str(error)}
    }
