"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Input violates an operation's precondition."""


class UnsupportedWaveletError(InvalidInputError):
    """Wavelet name is not one of the supported Daubechies filters."""


class FormatError(InvalidInputError):
    """A persisted file is corrupt, truncated, or has an unknown version."""
