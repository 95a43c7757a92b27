class InputError(ValueError):
    """Raised for invalid arguments, malformed files or inconsistent configs."""


class ConstructionError(ValueError):
    """Raised when a distribution cannot be built with the requested shape."""
