"""Exception types raised across the package."""


class DualDegError(Exception):
    """Base class for all package errors."""


class InvalidParams(DualDegError, ValueError):
    pass


class TooLarge(DualDegError):
    pass


class ArityError(DualDegError, ValueError):
    pass


class DegenerateNodes(DualDegError, ValueError):
    pass


class MalformedLP(DualDegError, ValueError):
    pass


class EmptyDomain(DualDegError, ValueError):
    pass


class NotADualWitness(DualDegError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class AlphaTooLarge(DualDegError):
    def __init__(self, alpha):
        super().__init__(f"alpha = {alpha} is not below 1/40; pass override=True to force")
        self.alpha = alpha


class WrongWitnessKind(DualDegError):
    pass


class CertificateRejected(DualDegError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NotOrthogonalizing(DualDegError):
    pass


class InvalidInput(DualDegError, ValueError):
    pass


class Unconditionable(DualDegError):
    pass


class BadApproximator(DualDegError):
    pass


class DomainMismatch(DualDegError, ValueError):
    pass


class DimensionMismatch(DualDegError, ValueError):
    pass
