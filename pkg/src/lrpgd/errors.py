"""Exception types shared across the package."""


class LrpgdError(Exception):
    """Base class for package errors."""


class DimensionError(LrpgdError, ValueError):
    """Operands have incompatible or invalid shapes."""


class ParameterError(LrpgdError, ValueError):
    """A model or schedule parameter is out of its valid range."""


class InfeasibleSetError(LrpgdError, ValueError):
    """The requested constraint set is empty."""


class NonUniqueAlignmentError(LrpgdError, RuntimeError):
    """The nearest valid factorization is not unique at this point."""


class DegenerateSubspaceError(LrpgdError, ValueError):
    """A factor is rank-deficient where a full column space is required."""


class DegenerateInitError(LrpgdError, RuntimeError):
    """An initializer could not produce a usable starting factor."""


class InfeasibleStartError(LrpgdError, ValueError):
    """The solver was given a starting point outside the constraint set."""


class DivergenceError(LrpgdError, RuntimeError):
    """The solver hit a non-finite loss or gradient."""

    def __init__(self, message, iteration):
        super().__init__(message)
        self.iteration = iteration


class ConfigError(LrpgdError, ValueError):
    """An experiment configuration is invalid."""


class DegenerateAlignmentWarning(UserWarning):
    """Alignment hit a measure-zero tie and used the deterministic tie-break."""
