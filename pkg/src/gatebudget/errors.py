"""Exception types shared across the package."""


class GateError(Exception):
    """Base class for all errors raised by gatebudget."""


class NotUnitary(GateError):
    pass


class NotSymmetric(GateError):
    pass


class NumericalFailure(GateError):
    """A numerical routine did not reach its accuracy target."""


class DomainError(GateError, ValueError):
    pass


class EmptyInput(GateError, ValueError):
    pass
