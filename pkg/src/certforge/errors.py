"""Exception types shared across the engines."""


class CertforgeError(Exception):
    """Base class for all certforge errors."""


class BoundExceeded(CertforgeError):
    """A computation ran past its configured budget."""


class BadPrime(CertforgeError):
    """The prime interferes with the input data (bad reduction, degree drop, ...)."""


class BadReduction(BadPrime):
    """An elliptic curve has bad reduction at the prime."""


class PreconditionFailed(CertforgeError):
    """A documented operation precondition does not hold."""


class NotApplicable(CertforgeError):
    """The operation has nothing to report for this input."""


class PolySyntaxError(CertforgeError):
    """Polynomial text failed to parse; carries the 0-based offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class SchemaError(CertforgeError):
    """A certificate file violates the JSON schema; carries a JSON pointer."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{message} [{pointer or '/'}]")
        self.pointer = pointer


class DigestMismatch(CertforgeError):
    """Supplied inputs do not hash to the digests recorded in the envelope."""
