"""Exception types shared across the package."""


class PsiDensityError(Exception):
    """Base class for all library errors."""


class ParseError(PsiDensityError):
    """Raised on malformed expression text; carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvalDomainError(PsiDensityError):
    """Raised when evaluation leaves the natural domain of a subexpression."""

    def __init__(self, message: str, node=None):
        super().__init__(message)
        self.node = node


class DomainMismatchError(PsiDensityError):
    """Incompatible domains (scale vs. set, set vs. set, bad scale parameters)."""


class PreconditionError(PsiDensityError):
    """A stated precondition failed a numerical spot check."""


class ConvergenceError(PsiDensityError):
    """A numerical routine exhausted its budget without meeting its tolerance."""
