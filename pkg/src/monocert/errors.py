"""Exception types shared across the package."""


class MonocertError(Exception):
    """Base class for all package errors."""


class InvalidParameter(MonocertError, ValueError):
    """An argument violates an operation's precondition."""


class RoundingFailure(MonocertError):
    """Rounding a floating certificate produced a zero coefficient."""


class NumericFailure(MonocertError, ArithmeticError):
    """NaN or overflow in floating-point linear algebra."""


class ParseError(MonocertError, ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SchemaError(MonocertError, ValueError):
    """A certificate file is well-formed row by row but inconsistent as a whole."""


class CampaignError(MonocertError):
    """A certified system could not be exactly verified after all retries."""
