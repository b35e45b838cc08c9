"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class GapChainError(Exception):
    exit_code = 1


class ValidationError(GapChainError, ValueError):
    exit_code = 2


class SizeError(ValidationError):
    """Requested Hilbert-space dimension exceeds a configured ceiling."""


class CertificationError(GapChainError):
    exit_code = 3


class SolverError(GapChainError, RuntimeError):
    exit_code = 4

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class PhaseObstructionError(ValidationError):
    """Two models carry different boundary labels, so no gapped path joins them."""


class CriticalModelError(ValidationError):
    """An operation that needs a gapped model was given a critical parameter."""
