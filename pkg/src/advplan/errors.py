"""Exception types shared across the package."""


class AdvplanError(Exception):
    """Base class for all package-specific errors."""


class InvalidSizeError(AdvplanError, ValueError):
    """A size/count argument is non-positive or otherwise unusable."""


class RangeError(AdvplanError, ValueError):
    """An index (layer, position count, ...) falls outside its valid range."""


class ParseError(AdvplanError, ValueError):
    """A data file could not be parsed; message carries file and line."""


class DimensionMismatchError(AdvplanError, ValueError):
    """Vectors that must share a dimension do not."""


class NoDataError(AdvplanError, ValueError):
    """An input location contains no usable data."""


class InvalidInputError(AdvplanError, ValueError):
    """An argument violates the operation's contract."""


class DegenerateInputError(AdvplanError, ValueError):
    """Input lacks the variation needed for the requested computation."""


class InvalidThresholdError(AdvplanError, ValueError):
    """Thresholds are not strictly increasing."""


class ConfigError(AdvplanError, ValueError):
    """A run or sweep configuration is inconsistent or incomplete."""
