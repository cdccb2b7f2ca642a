"""Exception hierarchy shared by all gravirrev modules."""


class GravirrevError(Exception):
    pass


class DomainError(GravirrevError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvariantError(GravirrevError, ValueError):
    """A container was built from data that violates its invariants."""


class ValidationError(GravirrevError, ValueError):
    """User-supplied model data (kernel, system file) failed validation."""


class DegenerateConfigurationError(DomainError):
    pass


class ContractError(GravirrevError, ValueError):
    """Unit tags or dimensions of an open system do not fit together."""


class NumericalError(GravirrevError, RuntimeError):
    """Integration instability or a failed factorization."""


class ConvergenceError(NumericalError):
    def __init__(self, message, residual_history=()):
        super().__init__(message)
        self.residual_history = list(residual_history)
