"""Exception hierarchy shared by all modules."""


class RateDroError(Exception):
    """Base class for library errors."""


class ParameterDomainError(RateDroError, ValueError):
    """Model parameters violate their domain invariants."""


class DomainError(RateDroError, ValueError):
    """Arguments fall outside the domain of a rate function or solver."""


class DataError(RateDroError, ValueError):
    """A trajectory is malformed for the requested statistic."""


class DegenerateDataError(DataError):
    """A statistic's denominator vanishes on the observed data."""


class UsageError(RateDroError, TypeError):
    """Incompatible combination of model, statistic or ambiguity set."""


class StabilityError(RateDroError, ArithmeticError):
    """An iterative scheme failed to converge."""


class InsufficientDataError(RateDroError, ValueError):
    """Too few usable points for a regression."""


class InfeasibleError(RateDroError, ValueError):
    """A linear program has no feasible point."""


class UnboundedError(RateDroError, ValueError):
    """A linear program is unbounded."""
