"""Exception hierarchy.

Every error carries a ``code`` of the form ``<module>.<Name>`` so the command
line front end can report failures in a machine-parsable way.
"""


class ReslabError(Exception):
    """Base class for all library errors."""

    module = "reslab"

    @property
    def code(self) -> str:
        return f"{self.module}.{type(self).__name__}"


class ConfigError(ReslabError, ValueError):
    module = "config"


class DegeneratePoint(ReslabError, ValueError):
    """Raised for k = 0 (or a vanishing local wavenumber), where f± are not defined."""

    module = "scattering"


class PrecisionExhausted(ReslabError, ArithmeticError):
    """Raised when the requested working precision overflows."""

    module = "scattering"

    def __init__(self, message: str, digits_needed: int):
        super().__init__(message)
        self.digits_needed = digits_needed


class AtResonance(ReslabError, ZeroDivisionError):
    module = "scattering"


class InconsistentRoot(ReslabError):
    module = "resonance"


class TruncationError(ReslabError):
    """Parseval defect did not reach the requested tolerance."""

    module = "spectral"

    def __init__(self, message: str, defect: float):
        super().__init__(message)
        self.defect = defect


class NotApplicable(ReslabError, ValueError):
    module = "spectral"


class GridMismatch(ReslabError, ValueError):
    module = "oracle"
