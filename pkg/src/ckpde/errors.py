"""Exception hierarchy shared by every module of the package."""


class CKError(Exception):
    """Base class for all package errors."""


class ParseError(CKError):
    def __init__(self, message, position=None, text=None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class IndexRangeError(CKError):
    """A variable reference lies outside the system dimensions."""

    def __init__(self, ref, message=None):
        self.ref = ref
        super().__init__(message or f"variable reference {ref} is out of range")


class UnboundVariableError(CKError):
    def __init__(self, ref):
        self.ref = ref
        super().__init__(f"variable {ref} is not bound in the environment")


class InadmissibleValueError(CKError):
    """A reciprocal or primitive was applied where its exact value is undefined."""

    def __init__(self, guard, message):
        self.guard = guard
        super().__init__(message)


class ArityMismatchError(CKError):
    pass


class GuardViolationError(CKError):
    def __init__(self, message, guard=None, point=None):
        self.guard = guard
        self.point = point
        super().__init__(message)


class SchemaError(CKError):
    """Malformed input document."""


class DataMismatchError(CKError):
    """Cauchy data disagree with the base point of the system."""


class IncompatibilityError(CKError):
    """The computed second-derivative block is not symmetric."""

    def __init__(self, message, witnesses=()):
        self.witnesses = list(witnesses)
        super().__init__(message)


class CharacteristicSlopeError(CKError):
    def __init__(self, message, determinant=None):
        self.determinant = determinant
        super().__init__(message)


class SingularSystemError(CKError):
    """An exact linear system is inconsistent or has no unique solution."""

    def __init__(self, message, block=None):
        self.block = block
        super().__init__(message)


class ResidualError(CKError):
    """A series that must vanish to a given order does not."""

    def __init__(self, message, where=None, exponent=None, value=None):
        self.where = where
        self.exponent = exponent
        self.value = value
        super().__init__(message)


class NotRationalError(CKError):
    """An expression contains an analytic primitive, so it is not a rational function."""


class NotIntegralError(CKError):
    pass


class PolarSpaceError(CKError):
    pass
