"""Exception hierarchy shared by all modules.

Every failure mode surfaced by the toolkit maps onto one of these classes so
the CLI can translate them into its exit-code contract (1 usage, 2 data,
3 numerical).
"""


class HsiError(Exception):
    """Base class for all toolkit errors."""


class DataError(HsiError):
    """Invalid input data, file contents, or mismatched shapes (exit code 2)."""


class NumericalError(HsiError):
    """Numerical failure during optimization (exit code 3)."""


class UsageError(HsiError):
    """Bad command-line invocation (exit code 1)."""


class DimensionMismatch(DataError):
    pass


class NonFiniteValue(DataError):
    pass


class LabelOutOfRange(DataError):
    pass


class BadMagic(DataError):
    pass


class TruncatedPayload(DataError):
    pass


class HeaderTooLarge(DataError):
    pass


class IoFailure(DataError):
    pass


class BandOutOfRange(DataError):
    pass


class PaletteTooSmall(DataError):
    pass


class EmptyClass(DataError):
    pass


class FractionTooSmall(DataError):
    pass


class TooManySuperpixels(DataError):
    pass


class EmptySegment(DataError):
    pass


class EmptyMask(DataError):
    pass


class NonFiniteLoss(NumericalError):
    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch
