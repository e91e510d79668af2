class RelMBEError(Exception):
    """Base class; ``category`` is the machine-readable tag printed by the CLI."""

    category = "error"


class DomainError(RelMBEError, ValueError):
    category = "domain"


class ConfigError(RelMBEError, ValueError):
    """Invalid scenario configuration.

    ``kind`` is one of ``syntax``, ``unknown-key``, ``constraint``; ``key`` names
    the offending dotted key when there is one.
    """

    category = "config"

    def __init__(self, message, *, kind="constraint", key=None):
        self.kind = kind
        self.key = key
        prefix = f"{kind}"
        if key:
            prefix += f" [{key}]"
        super().__init__(f"{prefix}: {message}")


class NumericalError(RelMBEError, ArithmeticError):
    category = "numerical"

    def __init__(self, message, *, tau=None, z=None):
        self.tau = tau
        self.z = z
        super().__init__(message)


class OutputError(RelMBEError, OSError):
    category = "io"
