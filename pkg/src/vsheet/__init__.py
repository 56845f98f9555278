"""Stationary vortex sheets near nondegenerate point-vortex equilibria."""

from .domain import DISK, FREE, HALFPLANE, DomainModel, from_key
from .errors import ConsistencyError, DomainError, InputError, NumericalFailure, StateError, VsheetError
from .kirchhoff_routh import VortexConfig, find_critical
from .sheet import SheetState
from .solver import SolveOptions, SolveTrace, solve_at
from .verify import direct_residual

__all__ = [
    "DISK",
    "FREE",
    "HALFPLANE",
    "DomainModel",
    "from_key",
    "VsheetError",
    "InputError",
    "DomainError",
    "StateError",
    "ConsistencyError",
    "NumericalFailure",
    "VortexConfig",
    "find_critical",
    "SheetState",
    "SolveOptions",
    "SolveTrace",
    "solve_at",
    "direct_residual",
]

__version__ = "0.1.0"
