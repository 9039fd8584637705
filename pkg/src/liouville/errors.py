"""Exception hierarchy shared by every module."""


class LiouvilleError(Exception):
    pass


class DegenerateQuadruple(LiouvilleError, ValueError):
    pass


class DegenerateTriple(LiouvilleError, ValueError):
    pass


class DegenerateBox(LiouvilleError, ValueError):
    pass


class NonPositiveMass(DegenerateBox):
    """Box ordering gives a cross-ratio <= 1."""


class OutOfDomain(LiouvilleError, ValueError):
    pass


class RadiusExceeded(LiouvilleError, ValueError):
    """The punctured-disk estimate does not apply at this distance."""


class ParameterOutOfRange(LiouvilleError, ValueError):
    pass


class UnsupportedFamily(LiouvilleError, TypeError):
    pass


class NormOverflow(LiouvilleError, ArithmeticError):
    pass


class NormTooLarge(LiouvilleError, ValueError):
    pass


class DerivativeVanishes(LiouvilleError, ArithmeticError):
    pass


class NonConvergence(LiouvilleError, ArithmeticError):
    pass


class LevelTooDeep(LiouvilleError, ValueError):
    pass


class BranchViolation(LiouvilleError, ArithmeticError):
    def __init__(self, msg, level=None, cell=None):
        super().__init__(msg)
        self.level = level
        self.cell = cell


class OutsideNeighborhood(BranchViolation):
    """A deformed cell left the principal-branch disk around 1."""


class ToleranceNotReached(LiouvilleError, ArithmeticError):
    def __init__(self, msg, value=None, trace=None):
        super().__init__(msg)
        self.value = value
        self.trace = trace


class QuadratureBudgetExceeded(LiouvilleError, ArithmeticError):
    pass


class InsufficientLevels(LiouvilleError, ValueError):
    pass


class ConfigError(LiouvilleError, ValueError):
    pass
