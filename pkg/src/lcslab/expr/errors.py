class ExpressionError(ValueError):
    """Base class for parse and evaluation failures."""


class ParseError(ExpressionError):
    def __init__(self, message, offset, expected=None):
        self.offset = offset
        self.expected = expected
        text = f"{message} at offset {offset}"
        if expected:
            text += f" (expected {expected})"
        super().__init__(text)


class UnknownIdentifierError(ParseError):
    def __init__(self, name, offset):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", offset)


class ArityError(ParseError):
    def __init__(self, name, got, offset):
        self.name = name
        self.got = got
        super().__init__(f"function {name!r} takes 1 argument, got {got}", offset)


class DomainError(ExpressionError):
    def __init__(self, function, value):
        self.function = function
        self.value = value
        super().__init__(f"{function} is undefined at argument {value!r}")


class NonFiniteError(ExpressionError):
    pass
