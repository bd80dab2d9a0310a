class DimensionError(ValueError):
    """Matrix dimension is not one the library works with."""


class ContractError(ValueError):
    """Input violates a documented precondition (e.g. non-Hermitian matrix)."""


class ZeroProbabilityError(ArithmeticError):
    """A heralded branch was requested whose probability is (numerically) zero."""

    def __init__(self, probability, message=None):
        self.probability = probability
        super().__init__(message or f"branch probability {probability:.3e} is below cutoff")
