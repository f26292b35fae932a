"""Exception types raised by boostnet."""


class BoostnetError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(BoostnetError, ValueError):
    """A hyper-parameter or option is outside its valid range."""


class DataError(BoostnetError, ValueError):
    """A dataset cannot be used as requested (wrong labels, empty, ...)."""


class ParseError(DataError):
    """A CSV cell could not be parsed; carries row/column address."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        if row is not None or column is not None:
            message = f"{message} (row {row}, column {column!r})"
        super().__init__(message)


class TrainingDivergedError(BoostnetError, RuntimeError):
    """A sub-network fit produced a non-finite loss or weights."""


class ModelFormatError(BoostnetError, ValueError):
    """A model file is malformed; the message names the offending field."""


class ModelVersionError(ModelFormatError):
    """A model file was written by an unsupported format version."""
