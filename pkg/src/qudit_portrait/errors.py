class PortraitError(ValueError):
    """Base class for every invalid-input condition raised by qudit_portrait."""


# numerics
class NonHermitian(PortraitError):
    pass


class NonSquare(PortraitError):
    pass


class NegativeInput(PortraitError):
    pass


# states
class NegativeEntry(PortraitError):
    pass


class NotNormalized(PortraitError):
    pass


class TraceNotOne(PortraitError):
    pass


class NotPositive(PortraitError):
    pass


class BadRank(PortraitError):
    pass


class ZeroVector(PortraitError):
    pass


# placements
class ShapeTooSmall(PortraitError):
    pass


class NotAPermutation(PortraitError):
    pass


class DimensionMismatch(PortraitError):
    pass


class BadAxes(PortraitError):
    pass


class ShapeMismatch(PortraitError):
    pass


class PortraitTooLarge(PortraitError):
    """Dense portrait matrices are only built for lattices of at most 16 cells."""


# inequalities
class ArityMismatch(PortraitError):
    pass


class BudgetTooLarge(PortraitError):
    pass


class IndexOutOfRange(PortraitError):
    pass


class OverlappingGroups(PortraitError):
    pass


# tomography
class BadSpin(PortraitError):
    pass


class BadDimension(PortraitError):
    pass


class UnsupportedSpin(PortraitError):
    pass


class UnsupportedPreset(PortraitError):
    """No printed formula exists for the requested spin and inequality."""


# serialization
class SpecFormatError(PortraitError):
    pass
