class ExprError(Exception):
    """Base class for expression errors."""


class ParseError(ExprError):
    """Malformed expression text.

    ``offset`` is the byte offset into the UTF-8 encoded text where the
    problem was detected (``len(text)`` for a premature end of input).
    """

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifierError(ParseError):
    def __init__(self, name: str, offset: int, text: str = ""):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", offset, text)


class UnboundNameError(ExprError):
    pass


class DomainError(ExprError, ArithmeticError):
    """Evaluation left the domain of an operation.

    ``node`` is the rendered sub-expression whose evaluation failed.
    """

    def __init__(self, message: str, node: str):
        self.node = node
        super().__init__(f"{message} in {node}")


class NotPolynomialError(ExprError):
    pass
