"""Exception types shared across the toolkit.

Every domain failure raises a subclass of :class:`RingmarkError`, so callers
(and the CLI) can distinguish processing errors from programming errors.
"""


class RingmarkError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(RingmarkError):
    """Image/plane has the wrong number of channels or mismatched dimensions."""


class GeometryError(RingmarkError):
    """Ring layout is invalid or does not fit the given image size."""


class CapacityError(RingmarkError):
    """Payload does not fit the cell capacity of a layout."""


class SymmetryError(RingmarkError):
    """Spectrum is not conjugate-symmetric enough to invert to a real plane."""


class DegenerateError(RingmarkError):
    """A quantity needed for normalization is zero (nothing extracted)."""


class DecodeError(RingmarkError):
    """No payload could be distinguished in the spectrum."""


class NoContourError(RingmarkError):
    """Edge detection found no closed contour of meaningful size."""


class IlluminationError(RingmarkError):
    """Capture parameters would produce negative illumination."""


class ParamError(RingmarkError):
    """Attack parameter outside its documented range."""
