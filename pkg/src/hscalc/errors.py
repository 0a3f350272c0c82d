"""Exception types raised across the package."""


class HSCalcError(ValueError):
    """Base class for invalid inputs to the calculus."""


class OrderExceededError(HSCalcError):
    """A derivative order beyond what the function carries was requested."""


class NonConvergenceError(HSCalcError):
    """A truncation or refinement loop could not meet its tolerance."""


class NonConvergenceWarning(RuntimeWarning):
    pass


class FiniteDifferenceWarning(UserWarning):
    """Derivatives are being approximated by finite differences."""


class EndpointHitsLambdaError(HSCalcError):
    pass


class ValueAttainedError(HSCalcError):
    """The target value lies in the closure of the function's range."""


class ScalarEqualsLambdaError(HSCalcError):
    pass


class SingularShiftError(HSCalcError):
    pass


class RealShiftInsideSpectrumError(HSCalcError):
    pass


class SingularConditionerError(HSCalcError):
    pass


class SpectrumError(HSCalcError):
    """Spectral enclosure is missing or violates a precondition."""


class NotAnEigenvalueError(SpectrumError):
    pass
