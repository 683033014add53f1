"""Exception taxonomy shared by all htspec modules."""


class HtspecError(Exception):
    """Base class for all htspec errors."""


class UnsupportedDimensionPair(HtspecError):
    """No anticommuting skew-orthogonal system exists (or is known) for (m, n)."""


class ShapeMismatch(HtspecError):
    """Array shapes inconsistent with the owning group's dimensions."""


class GridTooCoarse(HtspecError):
    """Spectral truncation error of grid derivatives exceeds the requested tolerance."""


class BackendMismatch(HtspecError):
    """Operands use incompatible function backends."""


class TruncationError(HtspecError):
    """Tail mass outside the truncation radius exceeds tolerance."""


class AliasingError(HtspecError):
    """Requested frequency exceeds the Nyquist limit of the sampling grid."""


class DomainError(HtspecError):
    """Spectral parameter outside the profile's domain (A, B)."""


class NoBracket(HtspecError):
    """A sign-change bracket for the monotone solve could not be established."""


class ExponentOutOfRange(HtspecError):
    """Integrability exponent outside the admissible range."""


class QuadratureError(HtspecError):
    """Quadrature self-check (node doubling) failed to meet tolerance."""


class InvalidRegime(HtspecError):
    """Asymptotic regime incompatible with the profile family's spectrum."""


class InsufficientData(HtspecError):
    """Not enough points in the fitting window."""


class NonPositiveValue(HtspecError):
    """Log-log fitting requires strictly positive values."""
