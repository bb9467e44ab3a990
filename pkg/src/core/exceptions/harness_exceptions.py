#src/core/exceptions/harness_exceptions.py
"""
Configuration and persistence exceptions for the command-line harness,
plus the shared exception handler.
"""

from typing import Any, Dict, Optional

from src.core.exceptions.estimation_exceptions import SoftmixException


class ConfigurationException(SoftmixException):
    """Exception raised due to run-configuration issues."""

    def __init__(
        self,
        message: str,
        section: Optional[str] = None,
        key: Optional[str] = None,
        **kwargs: Any
    ):
        self.section = section
        self.key = key
        context = kwargs.get('context', {})
        context.update({"section": section, "key": key})
        super().__init__(message, error_code="CONFIGURATION_ERROR", context=context)


class PersistenceException(SoftmixException):
    """Exception raised when a data file cannot be read or written."""

    def __init__(self, message: str, path: Optional[str] = None, **kwargs: Any):
        self.path = path
        context = kwargs.get('context', {})
        context.update({"path": path})
        super().__init__(message, error_code="IO_ERROR", context=context)


def handle_softmix_exception(
    exception: SoftmixException,
    logger: Any = None,
    reraise: bool = True
) -> Optional[Dict[str, Any]]:
    """
    Handle toolkit exceptions with standardized logging.

    Args:
        exception: The exception to handle
        logger: Logger instance for error logging
        reraise: Whether to reraise the exception after handling

    Returns:
        Exception details as dictionary, if not reraised
    """
    error_details = exception.to_dict()

    if logger:
        logger.error(
            f"{exception.error_code}: {exception.message}",
            extra={
                "error_code": exception.error_code,
                "error_context": exception.context,
            },
        )

    if reraise:
        raise exception

    return error_details
