"""Exception types shared across the package."""


class VregError(Exception):
    """Base class for library errors."""


class InvalidDatumError(VregError):
    pass


class CapExceededError(VregError):
    """Raised before a computation that would exceed the element cap."""


class StructuralError(VregError):
    """A computed object violated a structural invariant it must satisfy."""


class DomainError(VregError):
    """Input outside the domain where a quantity is defined."""


class StarConditionError(VregError):
    """The product decomposition hypothesis fails for this torus."""
