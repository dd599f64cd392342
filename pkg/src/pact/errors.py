"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: parameter errors exit 2,
I/O errors (plain OSError) exit 3, data validation and file-format errors
exit 4.
"""


class ParameterError(ValueError):
    """A configuration value (flag, hyperparameter) is out of range."""


class ValidationError(ValueError):
    """Input data violates a shape, finiteness, or consistency requirement."""


class TensorFormatError(ValidationError):
    """A tensor file does not conform to the on-disk format."""
