"""Exception hierarchy shared by all netinvest modules."""


class NetInvestError(Exception):
    """Base class for every error raised by this package."""


class TreeSyntaxError(NetInvestError, ValueError):
    """Graph object does not follow the nested {"op": ...} format."""


class DuplicateEdgeId(TreeSyntaxError):
    pass


class ArityError(TreeSyntaxError):
    """Series or parallel composition with fewer than two children."""


class UnknownEdge(NetInvestError, KeyError):
    pass


class NonMonotoneReservation(NetInvestError, ValueError):
    pass


class UnsupportedReservation(NetInvestError, TypeError):
    """Closed forms requested for a reservation class that has none."""


class DivergentWelfare(NetInvestError, ArithmeticError):
    """Consumer surplus integral diverges (power law with alpha <= 1)."""


class EmptyInvestment(NetInvestError, ValueError):
    pass


class PreconditionViolated(NetInvestError, ValueError):
    pass


class TooManyPaths(NetInvestError, ValueError):
    pass


class ClosedFormMismatch(NetInvestError, AssertionError):
    """A closed-form result disagrees with its numerical cross-check."""
