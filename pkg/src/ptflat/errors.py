"""Exception hierarchy shared across the package."""


class PtflatError(Exception):
    """Base class for all errors raised by ptflat."""


class ParameterError(PtflatError, ValueError):
    """Invalid or out-of-contract model parameters."""


class OffManifoldError(ParameterError):
    """An operation that needs the flat-band condition got parameters off it."""


class OutOfDomainError(PtflatError, ValueError):
    """A closed-form expression was evaluated outside its range of validity."""


class NumericalError(PtflatError, ArithmeticError):
    """A numerical routine failed to deliver its contract."""


class ConvergenceError(NumericalError):
    """Iterative eigensolver ran out of its iteration budget.

    Attributes
    ----------
    converged : int
        Number of eigenvalues deflated before giving up.
    iterations : int
        Number of QR sweeps spent.
    """

    def __init__(self, message, converged=0, iterations=0):
        super().__init__(message)
        self.converged = converged
        self.iterations = iterations


class IllConditionedError(NumericalError):
    """Eigenvector basis too close to singular for spectral propagation."""
