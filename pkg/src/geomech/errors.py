"""Exception types shared across the package."""


class GeomechError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(GeomechError, ValueError):
    """Matrix or vector has an unsupported or inconsistent dimension."""


class SingularPointError(GeomechError, ValueError):
    """A field model was evaluated at (or too close to) an excluded point."""


class DegenerateMassError(GeomechError, ValueError):
    """det(1 - Q - Q_A) vanishes; the momentum equation cannot be solved."""


class DegenerateStructureError(GeomechError, ValueError):
    """The co-symplectic structure is degenerate at the requested point."""


class NoCaptureError(GeomechError, ValueError):
    """Initial data do not admit a critical-manifold entry point."""


class ConfigError(GeomechError, ValueError):
    """Experiment configuration is invalid; message carries the key path."""
