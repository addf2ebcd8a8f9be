"""Exception hierarchy for the kdvcontrol package.

Every failure mode that callers are expected to catch has a named class;
generic programming errors stay as plain ValueError/TypeError.
"""


class KdvControlError(Exception):
    """Base class for all package-specific errors."""


class CriticalLengthError(KdvControlError):
    """The interval length sits (within tolerance) on the critical set."""


class DegenerateCubicError(KdvControlError):
    """The exponent cubic r^3 + r + i*lam has a repeated root at this lam."""


class RootFindingError(KdvControlError):
    """A characteristic root search failed to converge or bracket."""


class MissedModeError(KdvControlError):
    """Two eigenvalue searches collapsed onto the same root."""


class DegenerateSlopeError(KdvControlError):
    """An eigenfunction boundary slope is below the degeneracy threshold."""


class DuplicateFrequencyError(KdvControlError):
    """A spectrum contains two (numerically) equal frequencies."""


class QuadratureError(KdvControlError):
    """A quadrature rule failed to reach its target accuracy."""


class PaleyWienerError(KdvControlError):
    """Synthesized control mass leaks outside its nominal time support."""


class RealificationError(KdvControlError):
    """Imaginary residue of a nominally real signal exceeds the audit bound."""


class ConditioningError(KdvControlError):
    """A Gram matrix is too ill-conditioned for a reliable solve."""


class CalibrationError(KdvControlError):
    """The window sharpness search exhausted its doubling budget."""


class ProjectionError(KdvControlError):
    """Modal truncation cannot represent the requested data."""


class SolverError(KdvControlError):
    """A time-domain PDE solve failed (linear solve, NaN, or blow-up)."""


class CflError(SolverError):
    """Explicit-term stability bound violated during a nonlinear solve."""


class PicardError(SolverError):
    """Inner Picard iterations failed to converge."""


class DivergenceError(KdvControlError):
    """An outer fixed-point iteration diverged."""


class ConfigError(KdvControlError):
    """A run configuration file or flag set is invalid."""
