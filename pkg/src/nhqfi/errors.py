"""Exception types shared across the package."""


class ChainSpecError(ValueError):
    """Raised when chain parameters violate a model constraint."""


class PairingError(RuntimeError):
    """Raised when left/right eigenvalue matching is ambiguous or fails."""


class ExceptionalPointError(RuntimeError):
    """Raised when an operation is requested on an EP-degenerate eigenpair."""


class RegimeError(RuntimeError):
    """Raised when data is outside the regime an operation is defined for."""
