"""Exception types raised across the package."""


class SvmrxError(Exception):
    """Base class for all package errors."""

    code = "error"


class NotPositiveDefinite(SvmrxError, ValueError):
    """A covariance matrix failed the Cholesky pivot test."""

    code = "not_positive_definite"


class DimensionMismatch(SvmrxError, ValueError):
    """Operand shapes are incompatible."""

    code = "dimension_mismatch"


class SingleClassData(SvmrxError, ValueError):
    """A binary training set contains only one label."""

    code = "single_class_data"


class MissingClass(SvmrxError, ValueError):
    """A multiclass training set lacks a required class or bit value."""

    code = "missing_class"


class InvalidConfig(SvmrxError, ValueError):
    """An experiment configuration failed validation."""

    code = "invalid_config"


class IoError(SvmrxError, OSError):
    """Reading or writing an artifact failed."""

    code = "io_error"
