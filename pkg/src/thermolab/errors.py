"""Exception types shared across the package.

Every failure mode that callers are expected to handle gets its own class;
all of them derive from :class:`ThermolabError` so CLI code can map them to
exit codes in one place.
"""


class ThermolabError(Exception):
    """Base class for all package-specific errors."""


class NonPositiveCoefficient(ThermolabError):
    """The diffusion coefficient is not strictly positive on (0, 1]."""


class UnsupportedClass(ThermolabError):
    """Operation requires a weakly or strongly degenerate profile."""


class DivergedQuadrature(ThermolabError):
    """Adaptive quadrature failed to meet its tolerance within the budget."""


class QuadratureFailure(DivergedQuadrature):
    """Quadrature backing an assembly or solve did not converge."""


class DimensionMismatch(ThermolabError):
    """State dimensions do not match the operator's spaces."""


class ConfigError(ThermolabError):
    """Run configuration is malformed; message carries the field path."""


class EigenSolverFailure(ThermolabError):
    """Dense eigenvalue computation did not converge."""


class TooLarge(ThermolabError):
    """Problem exceeds the dense-solver size cap."""


class SingularShift(ThermolabError):
    """i*lambda is numerically indistinguishable from an eigenvalue."""


class FactorizationFailure(ThermolabError):
    """Matrix factorization failed (singular or badly scaled system)."""


class DegenerateWindow(ThermolabError):
    """Decay-rate fit window has too few samples or underflowed energies."""
