"""Exception hierarchy shared by all chainhodge modules."""


class ChainHodgeError(Exception):
    """Base class for every error raised by this package."""


class NotAComplex(ChainHodgeError):
    """Boundary data violates d∘d = 0 or has inconsistent shapes."""

    def __init__(self, message, degree=None, entry=None):
        super().__init__(message)
        self.degree = degree
        self.entry = entry


class DegreeOutOfRange(ChainHodgeError):
    pass


class MissingScalar(ChainHodgeError):
    pass


class SingularMatrix(ChainHodgeError):
    pass


class DependentBasis(ChainHodgeError):
    pass


class BudgetExceeded(ChainHodgeError):
    pass


class DegenerateEnergy(ChainHodgeError):
    pass


class NotACycle(ChainHodgeError):
    pass


class NotSurjective(ChainHodgeError):
    pass


class RankDeficientBothWays(ChainHodgeError):
    pass


class NotATreeComplex(ChainHodgeError):
    pass


class NotPseudoRegular(ChainHodgeError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class WrongDimension(ChainHodgeError):
    pass


class ParseError(ChainHodgeError):
    pass
