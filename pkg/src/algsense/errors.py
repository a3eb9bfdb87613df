"""Exception types shared across the package."""


class AlgsenseError(Exception):
    """Base class for package-specific failures."""


class ConfigError(AlgsenseError, ValueError):
    """Invalid or inconsistent experiment configuration."""


class DimensionMismatchError(AlgsenseError, ValueError):
    """Operands with incompatible ambient or parameter dimensions."""


class NumericalError(AlgsenseError, RuntimeError):
    """A numerical procedure failed (singular pivot, non-convergence, ...)."""


class SingularPivotError(NumericalError):
    """Cross pivot block is singular or too ill-conditioned to invert."""


class RootFindingError(NumericalError):
    """Polynomial root finder did not reach the required backward error."""


class LineOnCurveError(NumericalError):
    """A line is contained in the curve; intersection is not zero-dimensional."""
