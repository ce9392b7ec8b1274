"""Exception types raised by the estimation, interval, and design routines."""


class PairedLrError(Exception):
    """Base class for all package-specific errors."""


class DegenerateTable(PairedLrError):
    """A marginal sensitivity or specificity estimate is 0 or 1, so a
    likelihood ratio or its variance is undefined."""


class InvalidDependence(PairedLrError):
    """Dependence factors violate their admissible bounds, or a cell
    probability falls outside [0, 1]."""


class FiellerInvalid(PairedLrError):
    """The Fieller confidence set is not a bounded interval.

    Carries diagnostics so callers can audit what happened instead of
    silently reordering roots.
    """

    def __init__(self, message, *, discriminant=None, denominator=None, roots=None):
        super().__init__(message)
        self.discriminant = discriminant
        self.denominator = denominator
        self.roots = roots


class BootstrapDegenerate(PairedLrError):
    """All bootstrap estimates fell on one side of the point estimate, so
    the bias-correction term is infinite."""


class ResampleExhausted(PairedLrError):
    """Too many consecutive degenerate bootstrap resamples."""


class InvalidPrecision(PairedLrError):
    """The requested precision is outside the admissible range for the
    chosen sample-size formula."""


class NonPositiveBracket(PairedLrError):
    """The variance bracket of the sample-size formula is not positive;
    the accuracy inputs are inconsistent."""


class NotConverged(PairedLrError):
    """The iterative sample-size procedure did not reach the requested
    precision within the allowed number of rounds."""
