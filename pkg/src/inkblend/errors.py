"""Exception taxonomy shared by all inkblend modules."""


class InkblendError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(InkblendError):
    """A scalar argument or option is outside its documented domain."""


class InvalidInputError(InkblendError):
    """An input collection (score list, point set, file) is unusable."""


class InvalidLandmarksError(InkblendError):
    """A landmark set violates the 68-point contract or is degenerate."""


class InvalidPairError(InkblendError):
    """Two images that must be comparable differ in shape or are too small."""


class NoSpaceError(InkblendError):
    """No free pixel remains in the requested placement region."""


class TooSmallError(InkblendError):
    """A fitted placement would fall below the minimum renderable size."""
