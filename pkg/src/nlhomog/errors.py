"""Error taxonomy shared across the package.

Every failure mode that callers are expected to handle gets its own class so
the CLI can map them onto exit codes without string matching.
"""


class NlhomogError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(NlhomogError):
    """A constructor or operation received an out-of-range parameter."""


class ConfigError(NlhomogError):
    """Experiment configuration is malformed (unknown key, bad type, bad value)."""


class GridMismatchError(NlhomogError):
    """Two grid-bound objects live on different grids."""


class ResolutionError(NlhomogError):
    """Grid spacing does not resolve the requested microscale (h > eps)."""


class QuadratureStallError(NlhomogError):
    """A geometrically stopped quadrature failed to contract."""


class QuadratureConvergenceError(NlhomogError):
    """Two quadrature refinement levels disagree beyond tolerance."""


class ScaleSeparationError(NlhomogError):
    """A check requiring eps << delta was called without scale separation."""


class SupportError(NlhomogError):
    """A function violates a support requirement (e.g. rhs too wide for the box)."""
