# Exception hierarchy for the locstab workbench

class LocstabError(ValueError):
    """Base class for every domain error raised by the workbench."""


# core-linalg
class NotHermitian(LocstabError):
    pass


class Nonfinite(LocstabError):
    pass


class NegativeEigenvalue(LocstabError):
    pass


class UnsupportedExponent(LocstabError):
    pass


# states
class DimensionCap(LocstabError):
    pass


class BadRegion(LocstabError):
    pass


class RegisterMismatch(LocstabError):
    pass


class InvalidState(LocstabError):
    pass


class PartitionInvalid(LocstabError):
    pass


# channels
class SupportMismatch(LocstabError):
    pass


class NotCompletelyPositive(LocstabError):
    pass


# correlators / markov / purification
class ParamsOutOfRange(LocstabError):
    pass


class RegionsOverlap(LocstabError):
    pass


class Inconclusive(LocstabError):
    pass


class UnpairedBlock(LocstabError):
    pass


class NotStabilizerInput(LocstabError):
    pass


class NotClassical(LocstabError):
    pass


class BoundViolation(LocstabError):
    """A proven inequality failed numerically beyond its slack."""


# models
class NonCommutingGenerators(LocstabError):
    pass


class BadName(LocstabError):
    pass


# lindblad
class NotDetailedBalanced(LocstabError):
    pass


class NotCommuting(LocstabError):
    pass


class NotLocallyBalanced(LocstabError):
    pass


# stability
class NotLocallyReversible(LocstabError):
    pass


class TooFewSamples(LocstabError):
    pass


# cli
class UnknownSuite(LocstabError):
    pass


class WriteFailure(LocstabError):
    pass


class ParseFailure(LocstabError):
    pass


class ConfigError(LocstabError):
    pass
