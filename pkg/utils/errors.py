"""
Exceptions raised by the numerical package.

Every error carries a human readable message and a JSON-ready payload so the
CLI and the web layer can render it the same way.
"""


class ControllabilityError(Exception):
    """Base class for all errors raised by the toolkit"""

    def __init__(self, message, **payload):
        super().__init__(message)
        self.message = message
        self.payload = payload

    def to_dict(self):
        data = {"error": type(self).__name__, "message": self.message}
        data.update(self.payload)
        return data


class ConfigInvalid(ControllabilityError):
    """Raised when an experiment configuration fails validation"""

    def __init__(self, errors):
        errors = list(errors)
        super().__init__("Invalid configuration: " + "; ".join(errors), fields=errors)
        self.errors = errors


class DomainError(ControllabilityError):
    pass


class DimensionMismatch(DomainError):
    pass


class MisalignedTime(DomainError):
    pass


class OffGridTime(DomainError):
    pass


class KinkProximity(DomainError):
    pass


class DegeneratePair(DomainError):
    pass


class DegenerateSet(DomainError):
    pass


class ZeroScale(DomainError):
    pass


class InnerNonConvergent(DomainError):
    pass


class ImplicitStageNonConvergent(DomainError):
    pass


class NotControllable(DomainError):
    pass


class NonConvergent(DomainError):
    pass
