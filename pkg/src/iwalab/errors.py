"""Exception hierarchy. Every error raised by the library derives from IwalabError."""


class IwalabError(Exception):
    pass


class InputError(IwalabError, ValueError):
    pass


class NonUnit(IwalabError, ArithmeticError):
    pass


class NotSquarefreeModP(IwalabError, ValueError):
    pass


class LevelBelowKappa(InputError):
    pass


class BadLevels(InputError):
    pass


class PrecisionTooLow(IwalabError, ValueError):
    pass


class NotDistinguished(InputError):
    pass


class NoSolutionAtPrecision(IwalabError):
    pass


class InconsistentParameters(InputError):
    pass


class PDividesOrder(IwalabError, ValueError):
    pass


class NonAbelianWithoutCandidates(IwalabError, ValueError):
    pass


class NotIdempotent(IwalabError, ValueError):
    pass


class SearchExhausted(IwalabError):
    pass


class NotCyclic(IwalabError, ValueError):
    pass


class ModulusMismatch(IwalabError, ValueError):
    pass


class NoPresentation(IwalabError, ValueError):
    pass


class InfiniteGroup(IwalabError, ValueError):
    pass


class NotMinimalSystem(IwalabError, ValueError):
    pass


class NotInjectiveTower(IwalabError, ValueError):
    pass


class InfiniteQuotient(IwalabError, ValueError):
    pass


class NoStableSuffix(IwalabError):
    pass


class InsufficientLevels(IwalabError):
    pass


class KappaTooSmall(IwalabError, ValueError):
    pass


class HasMuPart(IwalabError, ValueError):
    pass


class TooLarge(IwalabError, ValueError):
    pass


class CovarianceFailed(IwalabError):
    pass


class NoConsistentTwist(IwalabError, ValueError):
    pass
