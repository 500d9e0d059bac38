"""Exception hierarchy shared by every module."""


class ManifoldKineticsError(Exception):
    """Base class for all library errors."""


class NonPositiveMetric(ManifoldKineticsError):
    """The chart's metric is degenerate or indefinite at a sampled point."""


class ShapeMismatch(ManifoldKineticsError):
    """A field does not live on the grid it was paired with."""


class GridMismatch(ManifoldKineticsError):
    """Two distribution fields do not share grid, quadrature or node scaling."""


class BoundaryUnderflow(ManifoldKineticsError):
    """A non-periodic axis has too few nodes for a one-sided stencil."""


class OrderOutOfRange(ManifoldKineticsError):
    """Requested quadrature order is outside the supported range."""


class UnsupportedPolynomial(ManifoldKineticsError):
    """Velocity polynomial is not one of the supported moment kernels."""


class InvalidState(ManifoldKineticsError):
    """Density or temperature is not strictly positive (or not finite)."""


class CflViolation(ManifoldKineticsError):
    """Time step exceeds the stability bound."""


class NanDetected(ManifoldKineticsError):
    """A solver produced non-finite values."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite values detected at step {step}")


class InterpolationOutOfDomain(ManifoldKineticsError):
    """A characteristic left the domain across a non-periodic edge."""


class InsufficientSizes(ManifoldKineticsError):
    """A convergence study needs at least three grid sizes."""


class ConfigError(ManifoldKineticsError):
    """Malformed or unknown configuration."""
