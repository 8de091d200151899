"""Exception hierarchy shared by all modules."""


class ShortcutError(Exception):
    """Base class for every error raised by this package."""


class RejectedInputError(ShortcutError, ValueError):
    """An argument is outside its documented domain (bad label, s > 1, ...)."""


class ContractViolationError(ShortcutError, ValueError):
    """An operator or state fails a structural precondition (Hermiticity, norm, ...)."""


class SingularParameterError(ShortcutError, ValueError):
    """A closed form is evaluated at a parameter where it is singular."""


class SingularGapError(ShortcutError, ArithmeticError):
    """The spectral gap between the two lowest levels closed."""


class ProtocolInfeasibleError(ShortcutError, ArithmeticError):
    """The invariant ansatz has no real solution at some normalized time.

    ``tau`` carries the offending normalized time when known.
    """

    def __init__(self, message, tau=None):
        super().__init__(message)
        self.tau = tau


class DiagnosticError(ShortcutError, RuntimeError):
    """A diagnostic was requested outside the regime where it is meaningful."""
