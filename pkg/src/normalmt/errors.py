"""Exception and warning classes shared across the package."""


class NormalMTError(Exception):
    """Base class for all errors raised by normalmt."""


# -- subdivision ------------------------------------------------------------

class SchemeError(NormalMTError, ValueError):
    pass


class NonCenterable(SchemeError):
    pass


class PeriodTooSmall(SchemeError):
    pass


class NotExactlyLinear(SchemeError):
    pass


class NoDerivedScheme(SchemeError):
    pass


class FitFailure(SchemeError):
    pass


# -- curves -----------------------------------------------------------------

class CurveError(NormalMTError, ValueError):
    pass


class QuadratureNonConvergence(CurveError):
    pass


class NotMonotone(CurveError):
    pass


class TangencyWarning(UserWarning):
    """A normal line touches the curve without crossing it."""


# -- transform --------------------------------------------------------------

class ConfigError(NormalMTError, ValueError):
    pass


class WellPosednessError(NormalMTError):
    """The transform is not well-posed at some level/index.

    ``level`` and ``index`` locate the failure (fine level and fine index);
    either may be None when unknown.
    """

    reason = "ill-posed"

    def __init__(self, message, level=None, index=None):
        super().__init__(message)
        self.level = level
        self.index = index

    def as_dict(self):
        return {"reason": self.reason, "level": self.level,
                "index": self.index, "message": str(self)}


class NoIntersection(WellPosednessError, CurveError):
    reason = "no-intersection"


class MonotonicityViolation(WellPosednessError):
    reason = "monotonicity-violation"


class DegenerateDifference(WellPosednessError):
    reason = "degenerate-difference"
