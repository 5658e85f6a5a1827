class VFIError(Exception):
    """Base class for every error raised by the interpolation lab."""


class InputError(VFIError):
    """Bad user input: missing files, invalid flags, malformed arguments."""


class FormatError(InputError):
    """A file does not follow the format it claims to be."""


class DimensionMismatchError(InputError):
    pass


class ValueRangeError(InputError):
    pass


class EmptyDatasetError(InputError):
    pass


class UndefinedRegionError(VFIError):
    """A masked metric was asked for a region whose mask sums to zero."""
