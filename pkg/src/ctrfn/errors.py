"""Exception hierarchy shared by all modules."""


class CtrfnError(Exception):
    """Base class for errors raised by this package."""


class Inconclusive(CtrfnError):
    """A numerical decision could not be made at the requested resolution."""


class DimensionMismatch(CtrfnError, ValueError):
    pass


class NotHermitian(CtrfnError, ValueError):
    pass


class NegativeEigenvalue(CtrfnError, ValueError):
    pass


class RankDeficient(CtrfnError, ValueError):
    pass


class NotContraction(CtrfnError, ValueError):
    pass


class NotPureContraction(CtrfnError, ValueError):
    pass


class NotRealizable(CtrfnError, ValueError):
    pass


class RadiusTooSmall(CtrfnError, ValueError):
    pass


class BudgetExceeded(CtrfnError):
    pass


class OutsideDisk(CtrfnError, ValueError):
    pass


class DegreeMismatch(CtrfnError, ValueError):
    pass


class DegreeUndetected(CtrfnError):
    pass


class ExactnessTooShallow(CtrfnError):
    pass


class NotNilpotent(CtrfnError, ValueError):
    pass


class HypothesisViolated(CtrfnError):
    """Raised with the offending intersection dimension in ``.dim``."""

    def __init__(self, msg, dim=0):
        super().__init__(msg)
        self.dim = dim


class ConfigError(CtrfnError, ValueError):
    pass
