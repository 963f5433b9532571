"""Exception types raised by hierlag."""


class HierLagError(Exception):
    """Base class for all package errors."""


class NonFiniteCoefficient(HierLagError, ValueError):
    pass


class UnstableProcess(HierLagError, ValueError):
    pass


class DimensionMismatch(HierLagError, ValueError):
    pass


class LagTooLarge(HierLagError, ValueError):
    """A series is too short for the requested lag bound."""

    def __init__(self, series, n, L):
        self.series = series
        self.n = n
        self.L = L
        super().__init__(f"series {series!r} has {n} samples, needs more than L={L}")


class LagBoundInfeasible(HierLagError, ValueError):
    """No lag bound L >= 1 satisfies the sample-size constraint."""


class DegenerateProbe(HierLagError, RuntimeError):
    """Every restricted-eigenvalue probe had a nonpositive denominator."""


class ParseError(HierLagError, ValueError):
    def __init__(self, line, reason, path=None):
        self.line = line
        self.reason = reason
        self.path = path
        where = f"{path}:" if path else "line "
        super().__init__(f"{where}{line}: {reason}")


class EmptySeries(HierLagError, ValueError):
    def __init__(self, series_id):
        self.series_id = series_id
        super().__init__(f"series {series_id!r} has no observations")
