"""Exception hierarchy. Each class carries the CLI exit status it maps to."""


class UIOError(Exception):
    exit_code = 1


class ValidationError(UIOError, ValueError):
    """Malformed input: bad shapes, violated type invariants, bad config."""

    exit_code = 2


class AssumptionError(ValidationError):
    """Raised when CME is not full column rank, so no decoupling H exists."""


class PreconditionError(ValidationError):
    pass


class InfeasibleError(UIOError):
    """No grid point produced a verified certificate.

    ``log`` holds the per-grid-point solver statuses.
    """

    exit_code = 3

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = list(log or [])


class VerificationError(UIOError):
    exit_code = 4


class CertificateError(VerificationError):
    """A certificate violates its structural invariants (P diagonal positive, ...)."""


class NumericalFault(UIOError):
    """CFL violation or non-finite values during time stepping."""

    exit_code = 5
