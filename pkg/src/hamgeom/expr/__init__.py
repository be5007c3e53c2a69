"""Expression parsing, evaluation and forward-mode differentiation."""

from hamgeom.expr.dual import Dual, gradient as dual_gradient, primal
from hamgeom.expr.errors import (
    DomainError,
    ExprError,
    NotPolynomialError,
    ParseError,
    UnboundNameError,
    UnknownIdentifierError,
)
from hamgeom.expr.expression import BoundExpression, Expression
from hamgeom.expr.polynomial import Polynomial, poly_partial


def parse(text, coordinates, parameters=()):
    """Parse ``text`` into an :class:`Expression` over ``coordinates``."""
    return Expression.parse(text, coordinates, parameters)


def evaluate(e, x, params=None):
    return e.evaluate(x, params)


def gradient(e, x, params=None):
    return e.gradient(x, params)


__all__ = [
    "BoundExpression",
    "DomainError",
    "Dual",
    "ExprError",
    "Expression",
    "NotPolynomialError",
    "ParseError",
    "Polynomial",
    "UnboundNameError",
    "UnknownIdentifierError",
    "dual_gradient",
    "evaluate",
    "gradient",
    "parse",
    "poly_partial",
    "primal",
]
