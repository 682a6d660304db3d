"""Exception hierarchy shared by all modules."""


class CarnotError(Exception):
    """Base class for every error raised by the package."""


class StructureError(CarnotError, ValueError):
    """Shapes of tensors, gradings or points do not fit together."""


class EquiregularityError(CarnotError):
    """Bracket-generation of the filtration fails at a point."""


class DomainError(CarnotError, ValueError):
    """A scalar argument lies outside its admissible range."""


class FlowEscapeError(CarnotError):
    """An integral curve left the coordinate domain of a frame."""

    def __init__(self, message, exit_time):
        super().__init__(message)
        self.exit_time = exit_time


class InversionError(CarnotError):
    """Newton inversion of the exponential chart did not converge."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class NotExtendableError(CarnotError):
    """A horizontal block does not induce a graded homomorphism."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class NotContactError(CarnotError):
    """Difference quotients of a map do not approach a horizontal homomorphism."""


class AssumptionError(CarnotError, ValueError):
    """The horizontal layer of the image is smaller than that of the preimage."""


class ResourceError(CarnotError):
    """An estimator would exceed its configured work cap."""


class DegenerateDataError(CarnotError, ValueError):
    """Rate fitting received nonpositive or insufficient data."""


class ConfigError(CarnotError, ValueError):
    """A scenario document is malformed or references unknown names."""
