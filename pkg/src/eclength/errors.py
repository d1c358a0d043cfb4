"""Exception hierarchy for the eclength package."""


class EclengthError(Exception):
    """Base class for all package-specific errors."""


class NonFiniteError(EclengthError):
    """A numerical value became NaN or infinite (overflow, divergence)."""


class SingularTransferError(EclengthError):
    """A knot-matching matrix is numerically singular; sections cannot be glued."""


class OutOfDomainError(EclengthError):
    """Evaluation point lies outside the space's interval."""


class RankDeficientError(EclengthError):
    """Endpoint conditions do not pin down a one-dimensional solution, or the
    pinned solution vanishes to higher order than requested at an endpoint."""


class NotPositiveError(EclengthError):
    """A basis function expected positive on the open interval is not."""


class SingularExpansionError(EclengthError):
    """A section-local basis matrix cannot be inverted reliably."""


class ZeroDenominatorError(EclengthError):
    """A column sum in the coefficient recursion vanished; upstream tolerance
    misclassification.  The test reports Inconclusive in this case."""


class ConstantsAbsentError(EclengthError):
    """The space does not contain the constant functions."""


class NotGoodForDesignError(EclengthError):
    """The space has no Bernstein basis on the interval (some unity-expansion
    coefficient is non-positive, or no endpoint basis exists)."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NotDesignSpaceError(EclengthError):
    """The characteristic polynomial does not vanish at the origin, so the
    kernel contains no constants."""


class ExhaustedError(EclengthError):
    """The coarse search hit its probe limit without finding a failing length."""

    def __init__(self, k_max):
        super().__init__(f"no failing interval found within k_max={k_max} probes")
        self.k_max = k_max


class LevelsMissingError(EclengthError):
    """The test report does not retain per-level tensors (run with keep_levels)."""


class OutOfRegimeError(EclengthError):
    """Closed-form equation parameters lie outside the equation's validity region."""


class NoSignChangeError(EclengthError):
    """A bracketing scan found no sign change in the requested range."""


class QuadratureFailure(EclengthError):
    """Adaptive quadrature did not reach the requested accuracy."""
