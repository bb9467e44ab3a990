#src/core/exceptions/estimation_exceptions.py
"""
Estimation exceptions for the softmax mixture toolkit.
Defines the base exception and the errors raised by the numerical core.
"""

from typing import Any, Dict, Optional, Sequence


class SoftmixException(Exception):
    """Base exception for all toolkit errors."""

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        context: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.error_code = error_code
        self.context = context or {}
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to dictionary for logging/serialization."""
        return {
            "exception_type": self.__class__.__name__,
            "message": self.message,
            "error_code": self.error_code,
            "context": self.context
        }


class InvalidInputException(SoftmixException):
    """Raised when an argument violates a documented precondition."""

    def __init__(
        self,
        message: str,
        parameter: Optional[str] = None,
        error_code: str = "INVALID_INPUT",
        **kwargs: Any
    ):
        self.parameter = parameter
        context = kwargs.get('context', {})
        context.update({"parameter": parameter})
        super().__init__(message, error_code=error_code, context=context)


class UnsupportedDegreeException(InvalidInputException):
    """Raised when the moment degree 2K-1 exceeds the configured cap."""

    def __init__(self, message: str, degree: int, cap: int, **kwargs: Any):
        self.degree = degree
        self.cap = cap
        context = kwargs.get('context', {})
        context.update({"degree": degree, "cap": cap})
        super().__init__(
            message,
            parameter="K",
            error_code="UNSUPPORTED_DEGREE",
            context=context
        )


class NumericDegeneracyException(SoftmixException):
    """Raised when a likelihood or probability degenerates numerically."""

    def __init__(self, message: str, iteration: Optional[int] = None, **kwargs: Any):
        self.iteration = iteration
        context = kwargs.get('context', {})
        context.update({"iteration": iteration})
        super().__init__(message, error_code="NUMERIC_DEGENERACY", context=context)


class ProjectionFailureException(SoftmixException):
    """Raised when the moment projection cannot reach a feasible point."""

    def __init__(
        self,
        message: str,
        infeasibility: Optional[float] = None,
        iterations: Optional[int] = None,
        **kwargs: Any
    ):
        self.infeasibility = infeasibility
        self.iterations = iterations
        context = kwargs.get('context', {})
        context.update({"infeasibility": infeasibility, "iterations": iterations})
        super().__init__(message, error_code="PROJECTION_FAILURE", context=context)


class DegenerateMomentsException(SoftmixException):
    """Raised when the moment Hankel matrix is numerically singular."""

    def __init__(
        self, message: str, condition_number: Optional[float] = None, **kwargs: Any
    ):
        self.condition_number = condition_number
        context = kwargs.get('context', {})
        context.update({"condition_number": condition_number})
        super().__init__(message, error_code="DEGENERATE_MOMENTS", context=context)


class ComplexRootException(SoftmixException):
    """Raised when the moment polynomial has genuinely complex roots."""

    def __init__(
        self, message: str, roots: Optional[Sequence[complex]] = None, **kwargs: Any
    ):
        self.roots = list(roots) if roots is not None else []
        context = kwargs.get('context', {})
        context.update({"roots": [str(r) for r in self.roots]})
        super().__init__(message, error_code="COMPLEX_ROOT", context=context)


class MomFailureException(SoftmixException):
    """Raised when a stage of the moment pipeline fails.

    ``partial_result`` holds the estimate assembled from the real parts of
    the roots when the failure happened at root finding.
    """

    def __init__(
        self,
        message: str,
        stage: str,
        partial_result: Any = None,
        **kwargs: Any
    ):
        self.stage = stage
        self.partial_result = partial_result
        context = kwargs.get('context', {})
        context.update({
            "stage": stage,
            "has_partial_result": partial_result is not None
        })
        super().__init__(message, error_code="MOM_FAILURE", context=context)


class AxisSelectionException(SoftmixException):
    """Raised when no candidate projection axis yields valid moments."""

    def __init__(self, message: str, n_candidates: Optional[int] = None, **kwargs: Any):
        self.n_candidates = n_candidates
        context = kwargs.get('context', {})
        context.update({"n_candidates": n_candidates})
        super().__init__(message, error_code="AXIS_SELECTION_FAILURE", context=context)
