"""Exception hierarchy shared by all modules."""


class GSBQError(Exception):
    """Base class for every error raised by this package."""


class NotPowerOfTwo(GSBQError, ValueError):
    pass


class NonPositiveLength(GSBQError, ValueError):
    pass


class DomainError(GSBQError, ValueError):
    """Parameters lie outside the subsonic region c^2 < 1, beta < 2 sqrt(1 - c^2)."""


class QuadratureNonConvergence(GSBQError, RuntimeError):
    pass


class NonConvergence(GSBQError, RuntimeError):
    pass


class DegenerateIterate(GSBQError, RuntimeError):
    pass


class TailTruncation(GSBQError, RuntimeError):
    """Profile has not decayed at the edge of the periodic box."""


class StepTooLarge(GSBQError, ValueError):
    pass


class ScaleOutOfRange(GSBQError, ValueError):
    pass


class BlowupDetected(GSBQError, RuntimeError):
    pass


class NonFinite(GSBQError, FloatingPointError):
    pass


class UsageError(GSBQError, ValueError):
    pass
