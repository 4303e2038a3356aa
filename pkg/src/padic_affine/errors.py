"""Exception hierarchy shared across the package."""


class PadicAffineError(Exception):
    """Base class for all package errors."""


class ContextMismatch(PadicAffineError):
    """Two objects built over different primes were mixed."""


class KindMismatch(PadicAffineError):
    """A p-adic-valued function was used where a real-valued one is required
    (or vice versa)."""


class OverlappingParts(PadicAffineError):
    """Step-function parts were given on balls that are not pairwise disjoint."""


class UnboundedIntegral(PadicAffineError):
    """An integral with a nonzero tail was requested over an unbounded region."""


class UnsupportedShape(PadicAffineError):
    """No closed form exists for this cylinder-function shape; use Monte Carlo."""


class WindowMismatch(PadicAffineError):
    """A configuration window does not cover the region required by the operation."""


class ContractViolation(PadicAffineError):
    """An operation was called with an element outside its stated contract."""


class ParseError(PadicAffineError):
    """Literal text did not match the grammar."""

    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column
