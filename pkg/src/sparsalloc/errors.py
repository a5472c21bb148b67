"""Exception types shared across the package."""


class SparsallocError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(SparsallocError, ValueError):
    """Operands have incompatible or invalid dimensions."""


class DomainError(SparsallocError, ValueError):
    """A parameter is outside its admissible range."""


class NetFileError(SparsallocError, ValueError):
    """A net/mask file is corrupt, truncated, or has an unsupported version."""
