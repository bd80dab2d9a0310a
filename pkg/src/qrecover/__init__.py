"""Heralded entanglement recovery against amplitude damping in repeater nodes."""

from qrecover.errors import ContractError, DimensionError, ZeroProbabilityError

__version__ = "0.1.0"

__all__ = ["ContractError", "DimensionError", "ZeroProbabilityError", "__version__"]
