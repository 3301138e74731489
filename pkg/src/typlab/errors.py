"""Exception types shared across the package."""


class TyplabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDistributionError(TyplabError, ValueError):
    """A probability table or parameter fails a validity check."""


class TruncationError(TyplabError, ValueError):
    """A tail truncation cannot reach the requested residual mass."""


class BoundViolationError(TyplabError, ValueError):
    """A row log-moment exceeds its configured cap or diverges."""


class MissingKernelRowError(TyplabError, KeyError):
    """A conditional row was requested for a symbol with no row defined."""


class UnsupportedSamplingError(TyplabError, NotImplementedError):
    """The distribution family has no exact sampler implemented."""


class SequenceFormatError(TyplabError, ValueError):
    """A sequence file or array triple is malformed."""
