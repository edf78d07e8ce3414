"""Exception types shared across the package."""


class KoenigError(Exception):
    """Base class for all package errors."""


class CycleDetected(KoenigError):
    """A cover list induces a directed cycle."""


class SizeLimit(KoenigError):
    """An exhaustive enumeration was asked for more than its configured cap."""


class NotConnected(KoenigError):
    """Cell collection is not edge-connected."""


class EmptyInput(KoenigError):
    """Input describes no cells / no data."""


class NotSimple(KoenigError):
    """Operation requires a simple (hole-free) polyomino."""


class NotTree(KoenigError):
    """Operation requires a tree polyomino."""


class PreconditionViolated(KoenigError):
    """A constructive extension was applied outside its hypotheses."""


class BudgetExceeded(KoenigError):
    """Groebner oracle exceeded its reduction-step budget."""


class EqualMonomials(KoenigError):
    """compare() was asked to order a monomial against itself."""


class UnitMonomial(KoenigError):
    """A regular-sequence test received the unit monomial."""
