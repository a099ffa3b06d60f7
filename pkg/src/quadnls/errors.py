"""Exception hierarchy shared by all modules."""


class QuadNLSError(Exception):
    """Base class for every error raised by quadnls."""


class DomainError(QuadNLSError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class NumericalCorruptionError(QuadNLSError, FloatingPointError):
    """Non-finite values appeared in a wavefunction."""


class SingularTimeError(QuadNLSError):
    """Propagation time could not be split into nonsingular factors."""


class ResolutionError(QuadNLSError):
    """The grid cannot resolve the requested operation."""


class BoundaryMassError(ResolutionError):
    """Too much mass sits near the edge of the periodic box."""


class ConvergenceError(QuadNLSError):
    """An iterative procedure did not converge."""


class ScenarioError(QuadNLSError):
    """Malformed or inconsistent scenario description."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
