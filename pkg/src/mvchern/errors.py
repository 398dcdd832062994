"""Exception hierarchy shared by the symbolic and numeric layers."""


class MVChernError(Exception):
    """Base class for every error raised by this package."""


class UnsupportedN(MVChernError, ValueError):
    pass


class DegenerateConfig(MVChernError, ValueError):
    """A camera configuration fails a rank or general-position requirement."""


class ConfigParseError(MVChernError, ValueError):
    """Malformed camera JSON.  ``path`` locates the offending entry."""

    def __init__(self, message, path=None):
        self.path = path
        where = f" at {path}" if path else ""
        super().__init__(f"{message}{where}")


class ExpressionParseError(MVChernError, ValueError):
    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} (at position {position})")


class UnknownGenerator(ExpressionParseError):
    pass


class NotTopDegree(MVChernError, ValueError):
    pass


class StuckNormalForm(MVChernError, RuntimeError):
    """A top-degree monomial did not reduce to a multiple of h^3."""


class InconsistentResolution(MVChernError, RuntimeError):
    pass


class NegativePolarDegree(MVChernError, ArithmeticError):
    pass


class TrackerBudgetExceeded(MVChernError, RuntimeError):
    pass


class UnstableCount(MVChernError, RuntimeError):
    pass
