"""Exception hierarchy.

Every domain error derives from :class:`SincInrError` so callers (and the
command line driver) can separate bad data from programming mistakes.
"""


class SincInrError(ValueError):
    """Base class for domain errors raised by this package."""


class UnsupportedKind(SincInrError):
    pass


class QuadratureTooCoarse(SincInrError):
    pass


class GridMismatch(SincInrError):
    pass


class DimensionMismatch(SincInrError):
    pass


class EmptyDataset(SincInrError):
    pass


class NonFiniteLoss(SincInrError):
    pass


class EmptyRange(SincInrError):
    pass


class BadShape(SincInrError):
    pass


class ShapeMismatch(SincInrError):
    pass


class MalformedHeader(SincInrError):
    pass


class TruncatedData(SincInrError):
    pass


class NonFiniteState(SincInrError):
    """Integration produced inf/nan.

    ``partial`` holds the trajectory up to (excluding) the first bad step.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SeriesTooShort(SincInrError):
    pass


class ConvergenceFailure(SincInrError):
    pass


class NonUniformGrid(SincInrError):
    pass


class LengthTooShort(SincInrError):
    pass


class RankDeficientLibrary(SincInrError):
    pass
