"""Exception hierarchy shared by all helmdist modules."""


class HelmdistError(Exception):
    """Base class for every error raised by helmdist."""


class ConfigError(HelmdistError, ValueError):
    """Invalid user-supplied configuration (geometry, sources, sweep settings)."""


class GeometryError(ConfigError):
    pass


class GridTooCoarse(ConfigError):
    """Grid spacing does not resolve the sqrt(a)-wide boundary layer."""


class EmptyInterface(HelmdistError, ValueError):
    pass


class BallOutsideGrid(HelmdistError, ValueError):
    pass


class BallUnresolved(HelmdistError, ValueError):
    pass


class SphereOutsideGrid(HelmdistError, ValueError):
    pass


class EmptyRegion(HelmdistError, ValueError):
    pass


class InsufficientRows(HelmdistError, ValueError):
    pass


class NumericalError(HelmdistError, ArithmeticError):
    """A computation ran but its result cannot be trusted."""


class NoConvergence(NumericalError):
    def __init__(self, iterations, residual):
        super().__init__(f"no convergence after {iterations} iterations (relative residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class LossOfPrecision(NumericalError):
    pass


class QuadratureTolExceeded(NumericalError):
    pass


class NonPositiveSolution(NumericalError):
    pass


class BranchDomainViolation(NumericalError):
    pass
