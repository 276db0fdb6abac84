"""Exception types raised by strandcc."""


class StrandCCError(Exception):
    """Base class for every error raised by this package."""


class InvalidGeometryError(StrandCCError, ValueError):
    pass


class InvalidParameterError(StrandCCError, ValueError):
    pass


class SingularLayoutError(StrandCCError, ValueError):
    """Two distinct conductors sit at the same coordinates."""


class AssemblyError(StrandCCError, ValueError):
    """Matrices or maps have inconsistent dimensions."""


class IncompleteFieldError(StrandCCError, KeyError):
    """A vector-potential field lacks entries the winding needs."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class SingularSystemError(StrandCCError, ArithmeticError):
    """A harmonic system is singular or too ill-conditioned to trust."""

    def __init__(self, message, harmonic=None, condition=None, alpha=None):
        super().__init__(message)
        self.harmonic = harmonic
        self.condition = condition
        self.alpha = alpha


class ConfigError(StrandCCError, ValueError):
    """Scenario or data file could not be parsed; ``key`` names the culprit."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
