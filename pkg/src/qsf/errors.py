"""Exception hierarchy shared by every module."""


class QSFError(Exception):
    """Base class; the CLI maps subclasses onto exit codes."""


class DomainError(QSFError, ValueError):
    pass


class PoleError(DomainError):
    pass


class PoleProximity(PoleError):
    """An argument sits within the guard band of a forbidden q-spiral."""


class GenericityViolation(DomainError):
    pass


class WindowViolation(DomainError):
    pass


class OutsideRadius(DomainError):
    pass


class DivergentSeries(DomainError):
    pass


class NonFiniteError(QSFError, ArithmeticError):
    pass


class TruncationBudgetExceeded(QSFError, ArithmeticError):
    pass


class TailDivergence(QSFError, ArithmeticError):
    pass


class RecursionSingular(QSFError, ArithmeticError):
    pass


class RootfindFailure(QSFError, ArithmeticError):
    pass


class SingularSolution(QSFError, ArithmeticError):
    pass


class FitFailure(QSFError):
    pass


class GevreyMismatch(QSFError):
    pass


class OverlapDomainEmpty(QSFError):
    pass


class UnknownFunction(QSFError, KeyError):
    pass


class SchemaMismatch(QSFError):
    pass
