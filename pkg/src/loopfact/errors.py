"""Exception types shared across the package."""


class LoopfactError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(LoopfactError, ValueError):
    pass


class SingularOnCircle(LoopfactError):
    """A loop fails to be invertible somewhere on the evaluation grid."""


class StepTooLarge(LoopfactError):
    """A path increment lies outside the injectivity radius of the logarithm."""


class LowerStratum(LoopfactError):
    """The loop has no factorization with trivial middle cocharacter.

    The accompanying :class:`~loopfact.birkhoff.StratumReport` is stored on
    ``self.report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DegenerateDn(LoopfactError, ZeroDivisionError):
    pass


class Degenerate(LoopfactError, ZeroDivisionError):
    """A closed-form action was requested on its excluded locus."""


class TruncationInsufficient(LoopfactError):
    pass


class RejectionStall(LoopfactError):
    pass


class AliasingExcessive(LoopfactError):
    pass


class UnnormalizableTag(LoopfactError, ValueError):
    pass


class QuadratureNonconvergent(LoopfactError):
    pass


class StepSizeUnstable(LoopfactError):
    pass


class DegenerateDenominator(LoopfactError, ZeroDivisionError):
    pass


class InsufficientSamples(LoopfactError, ValueError):
    pass
