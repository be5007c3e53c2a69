from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from hamgeom.expr.compile import compile_tree
from hamgeom.expr.errors import DomainError, NotPolynomialError, UnboundNameError
from hamgeom.expr.nodes import Binary, Const, Coord, Node, Param, Unary, render, walk
from hamgeom.expr.parser import parse_tree
from hamgeom.expr.polynomial import Polynomial


class Expression:
    """A parsed arithmetic expression over an ordered coordinate chart.

    ``coordinates`` is the full chart the expression lives on (its order fixes
    the order of gradients); ``free_coordinates`` lists the ones actually
    referenced.  Parameters are named constants supplied at evaluation time.
    """

    def __init__(self, root: Node, coordinates: Sequence[str], parameters: Iterable[str] = ()):
        self.root = root
        self.coordinates = tuple(coordinates)
        self.parameters = tuple(sorted(set(parameters)))
        used = {node.name for node in walk(root) if isinstance(node, (Coord, Param))}
        self.free_coordinates = tuple(c for c in self.coordinates if c in used)
        self.free_parameters = frozenset(p for p in self.parameters if p in used)
        self._compiled = None

    @classmethod
    def parse(cls, text: str, coordinates: Sequence[str], parameters: Iterable[str] = ()) -> "Expression":
        parameters = tuple(parameters)
        return cls(parse_tree(text, coordinates, parameters), coordinates, parameters)

    @classmethod
    def constant(cls, value: float, coordinates: Sequence[str]) -> "Expression":
        return cls(Const(float(value)), coordinates)

    @classmethod
    def coordinate(cls, name: str, coordinates: Sequence[str]) -> "Expression":
        coordinates = tuple(coordinates)
        return cls(Coord(name, coordinates.index(name)), coordinates)

    def __repr__(self) -> str:
        return f"Expression({self.render()!r}, coordinates={list(self.coordinates)})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Expression)
            and self.root == other.root
            and self.coordinates == other.coordinates
            and self.parameters == other.parameters
        )

    def __hash__(self) -> int:
        return hash((self.root, self.coordinates, self.parameters))

    def render(self) -> str:
        return render(self.root)

    __str__ = render

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    def _functions(self):
        if self._compiled is None:
            self._compiled = compile_tree(self.root, len(self.coordinates), list(self.parameters))
        return self._compiled

    @property
    def source(self) -> str:
        """Generated Python source of the compiled evaluators (for debugging)."""
        return self._functions()[2]

    def param_vector(self, params: Mapping[str, float] | None) -> tuple:
        params = params or {}
        missing = [p for p in self.free_parameters if p not in params]
        if missing:
            raise UnboundNameError(f"unbound parameter(s): {', '.join(sorted(missing))}")
        return tuple(float(params[p]) if p in params else math.nan for p in self.parameters)

    def _point(self, x) -> Sequence:
        if isinstance(x, Mapping):
            missing = [c for c in self.free_coordinates if c not in x]
            if missing:
                raise UnboundNameError(f"unbound coordinate(s): {', '.join(missing)}")
            return [x.get(c, 0.0) for c in self.coordinates]
        if len(x) != len(self.coordinates):
            raise ValueError(f"point has {len(x)} coordinates, chart has {len(self.coordinates)}")
        return x

    def bind(self, params: Mapping[str, float] | None = None) -> "BoundExpression":
        return BoundExpression(self, self.param_vector(params))

    def evaluate(self, x, params: Mapping[str, float] | None = None) -> float:
        return self.bind(params).value(self._point(x))

    __call__ = evaluate

    def gradient(self, x, params: Mapping[str, float] | None = None) -> np.ndarray:
        return np.array(self.bind(params).value_grad(self._point(x))[1])

    def to_polynomial(self, params: Mapping[str, float] | None = None) -> Polynomial:
        """Exact polynomial form; raises :class:`NotPolynomialError` otherwise.

        Float constants and parameter values are converted with
        :class:`fractions.Fraction`, which is exact for binary floats.
        """
        pv = dict(zip(self.parameters, self.param_vector(params)))
        return _to_poly(self.root, len(self.coordinates), pv)


class BoundExpression:
    """An expression with its parameters fixed; the hot-path evaluator."""

    __slots__ = ("expr", "params", "_value", "_value_grad")

    def __init__(self, expr: Expression, params: tuple):
        self.expr = expr
        self.params = params
        self._value, self._value_grad, _ = expr._functions()

    def value(self, x) -> float:
        """Evaluate at ``x``; works on floats and on dual numbers."""
        try:
            out = self._value(x, self.params)
        except OverflowError:
            raise DomainError("overflow", self.expr.render()) from None
        except ZeroDivisionError:
            raise DomainError("division by zero", self.expr.render()) from None
        if isinstance(out, float) and not math.isfinite(out):
            raise DomainError("non-finite result", self.expr.render())
        return out

    __call__ = value

    def value_grad(self, x) -> tuple[float, tuple]:
        try:
            v, g = self._value_grad(x, self.params)
        except (OverflowError, ZeroDivisionError):
            raise DomainError("overflow or division by zero", self.expr.render()) from None
        if not (math.isfinite(v) and all(math.isfinite(c) for c in g)):
            raise DomainError("non-finite result", self.expr.render())
        return v, g


def _to_poly(node: Node, n: int, params: Mapping[str, float]) -> Polynomial:
    if isinstance(node, Const):
        return Polynomial.constant(n, Fraction(node.value))
    if isinstance(node, Param):
        return Polynomial.constant(n, Fraction(params[node.name]))
    if isinstance(node, Coord):
        return Polynomial.variable(n, node.index)
    if isinstance(node, Unary):
        if node.op == "neg":
            return -_to_poly(node.arg, n, params)
        raise NotPolynomialError(f"{node.op}() is not polynomial: {render(node)}")
    left = _to_poly(node.left, n, params)
    if node.op == "^":
        right = _to_poly(node.right, n, params)
        if right.degree() > 0:
            raise NotPolynomialError(f"non-constant exponent: {render(node)}")
        k = right.terms.get((0,) * n, Fraction(0))
        if Fraction(k).denominator != 1 or k < 0:
            raise NotPolynomialError(f"exponent must be a non-negative integer: {render(node)}")
        return left ** int(k)
    right = _to_poly(node.right, n, params)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if right.degree() > 0:
        raise NotPolynomialError(f"division by a non-constant: {render(node)}")
    c = right.terms.get((0,) * n)
    if c is None:
        raise NotPolynomialError(f"division by zero: {render(node)}")
    return left * (1 / Fraction(c))
