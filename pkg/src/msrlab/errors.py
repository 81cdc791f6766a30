"""Exception hierarchy shared by every module.

All errors derive from :class:`MsrError`, itself a ``ValueError``, so callers
that only care about "bad input" can catch the builtin.
"""


class MsrError(ValueError):
    """Base class for all msrlab errors."""


class InputError(MsrError):
    """Malformed input: non-finite entries, wrong shape, asymmetry, bad config."""


class DimensionError(InputError):
    """Operands do not share a dimension."""


class NotPositiveError(MsrError):
    """A positive semidefinite argument was required."""

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class NotInvertibleError(MsrError):
    """The argument is singular up to tolerance."""

    def __init__(self, message, margin):
        super().__init__(message)
        self.margin = margin


class NotAProjectionError(MsrError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class NotCommutingError(MsrError):
    """Generators of a block fail to commute; carries the worst pair."""

    def __init__(self, message, pair, residual):
        super().__init__(message)
        self.pair = pair
        self.residual = residual


class BlockRefinementError(MsrError):
    """Joint diagonalization did not converge after all resamples."""


class NotInBlockError(MsrError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class HypothesisError(MsrError):
    """The hypotheses of an order check (e.g. ``0 <= a <= b``) do not hold.

    This is deliberately distinct from a failed verdict: a check whose
    premises are false says nothing about the property under test.
    """


class OracleMismatchError(MsrError):
    """Two independent computations that must agree did not."""
