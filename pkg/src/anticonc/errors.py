"""Exception hierarchy shared by every module."""


class AntiConcError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""


class InputError(AntiConcError, ValueError):
    """Malformed or out-of-range input (CLI exit code 1)."""


class IndexOutOfRange(InputError):
    pass


class DuplicateIndexWithinTerm(InputError):
    pass


class LengthMismatch(InputError):
    pass


class DomainMismatch(InputError):
    pass


class UnsupportedDistribution(InputError):
    pass


class InvalidP(InputError):
    pass


class DegreeZero(InputError):
    pass


class ConstantPolynomial(InputError):
    pass


class TooManyVariables(InputError):
    pass


class TreeTooLarge(InputError):
    pass


class EmptyCorpus(InputError):
    pass


class PatternLargerThanHost(InputError):
    pass


class BudgetExceeded(AntiConcError):
    """Exact search ran out of nodes; callers fall back to the greedy value."""

    def __init__(self, message, lower_bound=None):
        super().__init__(message)
        self.lower_bound = lower_bound


class HypothesisViolated(AntiConcError):
    """A bound or construction was asked for outside its stated hypotheses
    (CLI exit code 2)."""


class ParamInfeasible(HypothesisViolated):
    pass
