"""Exception hierarchy shared by every module."""


class DynResError(Exception):
    """Base class for all errors raised by this package."""


class Disconnected(DynResError):
    pass


class SameVertex(DynResError):
    pass


class NoSuchEdge(DynResError):
    pass


class NonPositiveWeight(DynResError):
    pass


class UnknownVertex(DynResError):
    pass


class SingularBlock(DynResError):
    """The eliminated block of a Laplacian is numerically singular."""


class Singular(DynResError):
    """An exact rational matrix has no inverse."""


class NotAWalk(DynResError):
    pass


class NotTerminalFree(DynResError):
    pass


class Budget(DynResError):
    """Walk enumeration exceeded its budget."""


class SharedNonTerminal(DynResError):
    pass


class NoBalancedSeparator(DynResError):
    pass


class TooManyTerminals(DynResError):
    pass


class WeightUnderflow(DynResError):
    pass


class ReductionMismatch(DynResError):
    """A reduction check failed; ``counterexample`` holds the offending instance."""

    def __init__(self, message, counterexample=None):
        super().__init__(message)
        self.counterexample = counterexample


class ParseError(DynResError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
