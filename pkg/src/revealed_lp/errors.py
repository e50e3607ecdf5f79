"""Exception types shared across learners, environments and the CLI."""


class ConfigError(ValueError):
    """Bad configuration (CLI exit code 64)."""


class InvariantViolation(RuntimeError):
    """A learner or environment reached a state its analysis rules out.

    ``state`` carries a JSON-friendly snapshot for debugging (CLI exit code 3).
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
