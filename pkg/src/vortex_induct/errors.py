class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class ConvergenceError(RuntimeError):
    """An iterative or adaptive routine failed to reach its tolerance."""


class UnsupportedModeError(ValueError):
    """Electron mode other than p = 0, n = 0."""


class OffsetTooLargeError(ValueError):
    """Transverse beam offset would put the beam into the tube wall."""


class ConfigError(ValueError):
    """Invalid or unreadable simulation configuration."""
