"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An argument broke a documented precondition."""


class GsetParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno
        self.message = message

    def __reduce__(self):
        return type(self), (self.lineno, self.message)


class BruteForceCapError(ContractViolation):
    pass


class SimulationFault(RuntimeError):
    """Raised when an integration produces a non-finite state or cannot proceed."""

    def __init__(self, message: str, t: float | None = None, index: int | None = None):
        detail = message
        if t is not None:
            detail += f" (t={t:g}"
            detail += f", node={index})" if index is not None else ")"
        super().__init__(detail)
        self.message = message
        self.t = t
        self.index = index

    def __reduce__(self):
        return type(self), (self.message, self.t, self.index)


class ConfigError(ValueError):
    """Bad or unknown key in a flat key-value config, or missing registry data."""
