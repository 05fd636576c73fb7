"""Exception hierarchy shared by the forge modules."""


class ForgeError(Exception):
    """Base class for every error raised by forge."""


class WordCountExceeded(ForgeError, OverflowError):
    pass


class CapExceeded(ForgeError):
    """A group closure grew past the configured element cap."""


class SearchExhausted(ForgeError):
    """The randomized quotient search ran out of tries."""


class ScheduleInfeasible(ForgeError):
    """The size schedule demands a block larger than the cap allows."""


class TowerFormatError(ForgeError, ValueError):
    pass


class Unreachable(ForgeError):
    pass


class DepthExceeded(ForgeError):
    pass


class MalformedCode(ForgeError, ValueError):
    pass


class FamilyNotFound(ForgeError):
    pass


class NotBijective(ForgeError):
    def __init__(self, msg, pair=None):
        super().__init__(msg)
        self.pair = pair


class FixedPointViolation(ForgeError):
    def __init__(self, msg, points=()):
        super().__init__(msg)
        self.points = tuple(points)


class NoCase(ForgeError):
    pass


class AmbiguousCase(ForgeError):
    def __init__(self, msg, tags=()):
        super().__init__(msg)
        self.tags = tuple(tags)


class NoSpecFound(ForgeError):
    pass


class Unrepresentable(ForgeError):
    pass
