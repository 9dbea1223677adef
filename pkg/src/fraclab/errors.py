class PreconditionError(ValueError):
    """Raised when an input violates an operation's admissibility constraint.

    ``constraint`` names the violated condition so callers (and the CLI) can
    report it without parsing the message.
    """

    def __init__(self, constraint, message=None):
        self.constraint = constraint
        super().__init__(message or constraint)


class GridMismatchError(ValueError):
    pass


class ZeroModeError(PreconditionError):
    def __init__(self, message="zero-mode loss: input is not mean-zero"):
        super().__init__("zero-mode loss", message)
