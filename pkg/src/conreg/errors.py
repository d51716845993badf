"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Malformed or out-of-contract input (bad shapes, non-finite data, bad ranges)."""


class SizeError(ValueError):
    """A brute-force computation would exceed its hard size cap."""


class InsufficientDataError(ValueError):
    """Not enough usable data points for the requested fit."""


class ConstructionFailedError(RuntimeError):
    """Randomized instance construction exhausted its retry budget."""


class UnsupportedExponentError(ValueError):
    """The regularizer exponent is outside the supported range for this operation."""
