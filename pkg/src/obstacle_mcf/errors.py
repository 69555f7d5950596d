"""Exception hierarchy shared by all modules."""


class ObstacleMCFError(Exception):
    """Base class; ``code`` is the machine-readable tag used by the CLI."""

    code = "error"


class StabilityError(ObstacleMCFError):
    code = "stability"


class MarginError(ObstacleMCFError):
    code = "margin"


class BlowUpError(ObstacleMCFError):
    code = "blow_up"


class KernelTooCloseError(ObstacleMCFError):
    code = "kernel_too_close"


class ExtinctError(ObstacleMCFError):
    code = "extinct"


class EmptyContourError(ObstacleMCFError):
    code = "empty_contour"


class ConfigError(ObstacleMCFError):
    code = "config"

    def __init__(self, key, reason):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason
