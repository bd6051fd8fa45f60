"""Exception hierarchy shared by all solvers."""


class GPEError(Exception):
    """Base class for solver errors."""


class InvalidInputError(GPEError, ValueError):
    """Shapes, parameters or configuration values that violate a contract."""


class UnsupportedDimensionError(InvalidInputError):
    pass


class NonexistenceError(InvalidInputError):
    """Requested ground state does not exist for these parameters."""


class NumericalFailureError(GPEError, ArithmeticError):
    """A linear solve or eigensolve broke down."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class NonConvergenceError(GPEError):
    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class BlowUpError(GPEError):
    """Non-finite values or mass drift detected during time stepping."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time
