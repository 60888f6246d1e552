"""Exception hierarchy shared by every solver module."""


class BagleyTorvikError(Exception):
    """Base class for all numerical failures raised by this package."""


class ZeroLeadingCoefficient(BagleyTorvikError, ValueError):
    pass


class DegenerateRoots(BagleyTorvikError):
    """The characteristic polynomial has (numerically) repeated roots."""


class NonConvergence(BagleyTorvikError):
    """An iterative or series procedure failed to meet its error target.

    ``diagnostics`` carries whatever the failing routine knows (terms used,
    largest term, achieved error estimate).
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class ResonantDenominator(BagleyTorvikError):
    pass


class QuadratureFailure(BagleyTorvikError):
    def __init__(self, message, achieved_error=None):
        super().__init__(message)
        self.achieved_error = achieved_error


class UnsupportedParameter(BagleyTorvikError, ValueError):
    """Requested parameters lie outside the region where accuracy is certified."""


class ImaginaryResidue(BagleyTorvikError):
    """A quantity that must be real carried a non-negligible imaginary part."""
