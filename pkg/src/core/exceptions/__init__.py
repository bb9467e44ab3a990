"""Exception hierarchy for the softmax mixture toolkit."""

from src.core.exceptions.estimation_exceptions import (
    AxisSelectionException,
    ComplexRootException,
    DegenerateMomentsException,
    InvalidInputException,
    MomFailureException,
    NumericDegeneracyException,
    ProjectionFailureException,
    SoftmixException,
    UnsupportedDegreeException,
)
from src.core.exceptions.harness_exceptions import (
    ConfigurationException,
    PersistenceException,
    handle_softmix_exception,
)

__all__ = [
    "AxisSelectionException",
    "ComplexRootException",
    "ConfigurationException",
    "DegenerateMomentsException",
    "InvalidInputException",
    "MomFailureException",
    "NumericDegeneracyException",
    "PersistenceException",
    "ProjectionFailureException",
    "SoftmixException",
    "UnsupportedDegreeException",
    "handle_softmix_exception",
]
