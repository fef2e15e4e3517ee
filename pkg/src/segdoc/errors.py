"""Exception types raised by segdoc."""


class SegdocError(Exception):
    """Base class for all library errors."""


class OutOfBounds(SegdocError, ValueError):
    pass


class DegenerateHistogram(SegdocError):
    """The gray image holds a single intensity, so no threshold separates it.

    ``level`` carries that intensity.
    """

    def __init__(self, level: int):
        super().__init__(f"all pixels have intensity {level}")
        self.level = level


class BlankImage(SegdocError, ValueError):
    pass


class NoHeaderFound(SegdocError):
    pass


class SpecInfeasible(SegdocError, ValueError):
    pass


class DimensionMismatch(SegdocError, ValueError):
    pass


class MalformedImage(SegdocError, ValueError):
    pass
