"""Exception types raised across the package."""


class VarAlgError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(VarAlgError, ValueError):
    pass


# linalg

class NotSymmetric(VarAlgError, ValueError):
    pass


class NotPositiveDefinite(VarAlgError, ValueError):
    def __init__(self, message, lambda1=None):
        super().__init__(message)
        self.lambda1 = lambda1


# nonlin / exprfn

class QuadratureBudgetExceeded(VarAlgError, RuntimeError):
    pass


class UnknownCatalogName(VarAlgError, KeyError):
    pass


class BadParams(VarAlgError, ValueError):
    pass


class ExprError(VarAlgError, ValueError):
    def __init__(self, message, position=0, expected=()):
        self.position = position
        self.expected = tuple(expected)
        detail = message
        if self.expected:
            detail += " (expected one of: %s)" % ", ".join(self.expected)
        super().__init__("%s at offset %d" % (detail, position))


class ExprSyntaxError(ExprError):
    pass


class UnknownFunction(ExprError):
    pass


class UnknownVariable(ExprError):
    pass


# thresholds

class NonpositiveSup(VarAlgError, ValueError):
    pass


class Infeasible(VarAlgError, ValueError):
    def __init__(self, message, margin=None, report=None):
        super().__init__(message)
        self.margin = margin
        self.report = report


class InfeasibleG1(Infeasible):
    pass


class InfeasibleG2(Infeasible):
    pass


# solver

class SolverError(VarAlgError, RuntimeError):
    pass


class NoDescentProgress(SolverError):
    pass


class GeometryViolated(SolverError):
    pass


class MaxDeformationIterations(SolverError):
    pass


class Diverged(SolverError):
    pass


class StalledAtNonCritical(SolverError):
    pass


class OnlyTrivialFound(SolverError):
    pass


class DistinctnessFailed(SolverError):
    pass


class PositivityViolated(SolverError):
    pass


# problems / oracle

class EmptyNet(VarAlgError, ValueError):
    pass


class Disconnected(VarAlgError, ValueError):
    pass


class BudgetExceeded(VarAlgError, ValueError):
    pass
