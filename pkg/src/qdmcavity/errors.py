"""Exception hierarchy shared by all qdmcavity modules."""


class QdmError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(QdmError, ValueError):
    """Invalid user-supplied parameters or configuration."""


class NegativeRateError(ConfigError):
    pass


class ZeroScaleUnitError(ConfigError):
    pass


class EmptyGridError(ConfigError):
    pass


class StrictOrderViolatedError(ConfigError):
    pass


class NumericError(QdmError, ArithmeticError):
    """A well-formed input hit a numerical singularity."""


class DegenerateDenominatorError(NumericError):
    pass


class ZeroTunnelingError(NumericError):
    pass


class NoTunnelingError(NumericError):
    pass


class StepTooLargeError(ConfigError):
    pass


class SingularSystemError(NumericError):
    pass


class PoleAtMinusOneError(NumericError):
    pass


class ZeroKappaError(NumericError):
    pass


class ZeroDispersionError(NumericError):
    pass


class ConventionViolationError(QdmError, ValueError):
    """A printed-convention (negative) absorption reached cavity physics."""


class PeakAtBoundaryError(NumericError):
    pass


class NoHalfCrossingError(NumericError):
    pass


class CellError(QdmError):
    """Failure of one cell of a parameter sweep.

    Attributes
    ----------
    index : int
        Position of the failing cell in the input work list.
    """

    def __init__(self, index, cause):
        self.index = index
        self.cause = cause
        super().__init__(f"cell {index} failed: {type(cause).__name__}: {cause}")
