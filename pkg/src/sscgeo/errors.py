"""Exception hierarchy shared by all modules."""


class SSCError(Exception):
    """Base class for every error raised by the package."""


class DimensionMismatch(SSCError, ValueError):
    pass


class Infeasible(SSCError):
    """The target vector is not in the column span of the dictionary."""


class Unbounded(SSCError):
    """The dual program is unbounded (equivalently, the primal is infeasible)."""


class NonConvergence(SSCError):
    """A certified tolerance could not be reached."""


class TooFewPoints(SSCError, ValueError):
    pass


class EmptyExternalSet(SSCError, ValueError):
    pass


class UnboundedPolar(SSCError):
    """Polar set is unbounded because the columns do not span the space."""


class GammaOutOfRange(SSCError, ValueError):
    pass


class RankTooLarge(SSCError, ValueError):
    pass


class DimensionInfeasible(SSCError, ValueError):
    pass


class ConfigError(SSCError, ValueError):
    pass
