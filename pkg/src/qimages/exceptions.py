"""Exception hierarchy.

Input problems derive from :class:`ValidationError` (a ``ValueError``);
failures that happen while a valid computation runs derive from
``RuntimeError``.  The CLI maps the first family to exit code 2 and the
second to exit code 1.
"""


class QImagesError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(QImagesError, ValueError):
    pass


class ShapeError(ValidationError):
    """Slot signatures or dimensions of two objects do not line up."""


class ConsistencyError(ValidationError):
    pass


class InsufficientSampleError(ValidationError):
    pass


class ContractViolation(QImagesError, RuntimeError):
    pass


class RunawayWalkError(QImagesError, RuntimeError):
    """A collapse walk exceeded its ``max_steps`` safety bound."""


class CapacityError(QImagesError, RuntimeError):
    pass


class DegenerateEnsembleError(QImagesError, RuntimeError):
    """No run of an ensemble survived detection-efficiency thinning."""


class ExportError(QImagesError, RuntimeError):
    pass
