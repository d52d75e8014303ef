"""Exception hierarchy shared by every module."""


class DisCoMaxError(ValueError):
    """Base class for all errors raised by this package."""


class NonFiniteError(DisCoMaxError):
    pass


class NonConvergenceError(DisCoMaxError):
    pass


class NotPositiveDefiniteError(DisCoMaxError):
    pass


class TooFewSamplesError(DisCoMaxError):
    pass


class NonSquareError(DisCoMaxError):
    pass


class SampleCountMismatchError(DisCoMaxError):
    pass


class DimensionMismatchError(DisCoMaxError):
    pass


class DegenerateDataError(DisCoMaxError):
    pass


class DegenerateZError(DisCoMaxError):
    pass


class DegenerateDenominatorError(DisCoMaxError):
    pass


class DegeneratePencilError(DisCoMaxError):
    pass


class BadDimensionError(DisCoMaxError):
    pass


class NoProgressError(DisCoMaxError):
    pass


class SingularSystemError(DisCoMaxError):
    pass


class AllConstantError(DisCoMaxError):
    pass


class EmptySliceError(DisCoMaxError):
    pass


class SingularCovarianceError(DisCoMaxError):
    pass


class NoNumericColumnsError(DisCoMaxError):
    pass


class ResponseColumnMissingError(DisCoMaxError):
    pass


class ConfigError(DisCoMaxError):
    pass
