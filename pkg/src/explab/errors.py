"""Exception types shared across explab.

Validation problems subclass ``ValueError`` so callers can catch them
generically; numerical failures subclass ``RuntimeError``.
"""


class ValidationError(ValueError):
    """Invalid input (bad pmf, malformed constellation, out-of-range parameter)."""


class UnsupportedKindError(ValidationError):
    """Operation not defined for this constellation kind."""


class BracketError(ValidationError):
    """Root bracket without a sign change."""


class ValidityError(ValidationError):
    """Closed-form expression evaluated outside its validity window."""


class ConfigError(ValidationError):
    """Simulation or run configuration rejected before any work is done."""


class QuadratureError(RuntimeError):
    """Quadrature failed to reach the requested tolerance.

    ``estimates`` holds the last two estimates seen before giving up.
    """

    def __init__(self, message, estimates=()):
        super().__init__(message)
        self.estimates = tuple(estimates)
