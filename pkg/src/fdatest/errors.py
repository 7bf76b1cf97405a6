"""Exception types shared across the package."""


class FdaTestError(Exception):
    """Base class for all package errors."""


class GridMismatchError(FdaTestError, ValueError):
    """Two curves (or a curve and a sample) live on different grids."""


class InputFormatError(FdaTestError, ValueError):
    """Malformed input data or configuration."""


class DegenerateError(FdaTestError, ValueError):
    """A statistic or null distribution has collapsed and cannot be used."""
