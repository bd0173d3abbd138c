"""Exception types shared by all modules.

The CLI maps these onto exit codes (2, 3, 4)."""


class LLLError(Exception):
    exit_code = 1


class InvalidInputError(LLLError, ValueError):
    exit_code = 2


class InapplicableError(InvalidInputError):
    """Raised when an operation's precondition does not hold for the instance."""


class CapExceededError(LLLError):
    exit_code = 3


class NonConvergenceError(LLLError):
    exit_code = 4
