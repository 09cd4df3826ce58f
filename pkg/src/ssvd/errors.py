"""Exception hierarchy shared by all ssvd modules."""


class SsvdError(Exception):
    """Base class for algorithmic failures (CLI exit code 2)."""


class EmptyInput(SsvdError, ValueError):
    pass


class DimensionMismatch(SsvdError, ValueError):
    pass


class RankCollapse(SsvdError):
    """A column was annihilated or became linearly dependent before QR."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class NoConvergence(SsvdError):
    pass


class MaxItersExceeded(SsvdError):
    pass


class DegenerateScale(SsvdError):
    """Robust z-scores undefined because every screening statistic is equal."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats


class InsufficientSelection(SsvdError):
    def __init__(self, message, n_rows=0, n_cols=0):
        super().__init__(message)
        self.n_rows = n_rows
        self.n_cols = n_cols


class EmptyLowBlock(SsvdError):
    pass


class FoldTooSmall(SsvdError):
    pass


class UnknownName(SsvdError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class BadLength(SsvdError, ValueError):
    pass


class NoSignal(SsvdError):
    """Rank estimation found nothing above the noise (estimated rank 0)."""
