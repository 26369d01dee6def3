# core/errors.py

class SSCSError(Exception):
    """Base class for every error raised by the toolkit"""


class InvalidSpecError(SSCSError, ValueError):
    """Spectral model rejected (parameter or Cauchy-Schwarz violation)"""

    def __init__(self, message: str, frequency: float = None):
        super().__init__(message)
        self.frequency = frequency


class DomainError(SSCSError, ValueError):
    """Argument outside the domain of a function (f = 0, negative x)"""


class ConfigurationError(SSCSError, ValueError):
    """Invalid sequence, SPAM or pipeline configuration"""


class InsufficientDataError(SSCSError, ValueError):
    """Not enough samples, lags or bins to complete an operation"""


class FlaggedLagsError(InsufficientDataError):
    """Too few unflagged lags left to form a spectrum"""


class GridMismatchError(SSCSError, ValueError):
    """Lag grids, frequency grids or file headers do not line up"""


class FormatError(SSCSError, ValueError):
    """Malformed or truncated trace/shot file"""


class InfeasibleSettingError(SSCSError):
    """No frequency setting satisfies the requested conditions"""

    def __init__(self, message: str, best: dict = None):
        super().__init__(message)
        self.best = best
