"""Exception types shared across the package."""


class AffineThermError(Exception):
    """Base class for all package-specific errors."""


class DomainError(AffineThermError, ValueError):
    """A point lies outside the admissible domain of a potential or generator."""


class StencilError(AffineThermError, RuntimeError):
    """A finite-difference stencil escapes the domain even at the minimum step."""


class SolveError(AffineThermError, RuntimeError):
    """An iterative solve (Newton inversion, root bracketing) failed to converge."""


class IntegrationError(AffineThermError, RuntimeError):
    """Numerical integration produced non-finite state."""


class MismatchError(AffineThermError, ValueError):
    """Two objects that must share a construction were built from different data."""


class ScenarioError(AffineThermError, ValueError):
    """A scenario file failed schema or semantic validation."""
