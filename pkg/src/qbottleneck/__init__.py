"""Information bottleneck rate functions for classical and two-party quantum sources."""

from ._backend import BACKEND
from .config import SolverConfig
from .errors import (
    DegenerateInstanceError,
    DomainError,
    InfeasibleError,
    InvalidStateError,
    NotCompletelyPositiveError,
    NotHermitianError,
    QIBError,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DegenerateInstanceError",
    "DomainError",
    "InfeasibleError",
    "InvalidStateError",
    "NotCompletelyPositiveError",
    "NotHermitianError",
    "QIBError",
    "SolverConfig",
    "__version__",
]
