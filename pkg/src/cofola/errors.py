"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes, so everything user-facing should
raise one of them rather than a bare ValueError.
"""


class CofolaError(Exception):
    """Base class for all errors raised by this package."""


class CofolaSyntaxError(CofolaError):
    """Lexer or parser rejected the program text."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        if line:
            message = f"line {line}:{col}: {message}"
        super().__init__(message)


class CofolaTypeError(CofolaError):
    """The program parsed but is not well-typed (unknown names, bad kinds,
    malformed arguments)."""


class UnsupportedError(CofolaError):
    """The program is valid but falls outside what the compiler can encode
    (e.g. two order-axiom objects, negations without a sound encoding)."""


class BudgetExceeded(CofolaError):
    """The enumeration oracle ran out of its expansion budget."""


class ResourceExceeded(CofolaError):
    """The ground backend exceeded a configured resource bound
    (free-atom count or order-interpretation count)."""
