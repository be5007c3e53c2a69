"""Syntax tree nodes and the text renderer.

Nodes are frozen dataclasses, so trees are hashable and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

UNARY_FUNCTIONS = ("sin", "cos", "tan", "arctan", "exp", "log", "sqrt")
BINARY_OPS = ("+", "-", "*", "/", "^")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Coord:
    name: str
    index: int


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or one of UNARY_FUNCTIONS
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Const, Coord, Param, Unary, Binary]


def render(node: Node) -> str:
    """Render a tree as text that parses back to an identical tree.

    Binary operations are always parenthesised, so the output does not
    depend on precedence rules.  Negative constants come out as ``(-c)``,
    which the parser folds back into a single constant; a negated
    non-negative constant is written ``(-(c))`` so it stays a negation.
    """
    if isinstance(node, Const):
        text = repr(float(node.value))
        if node.value < 0 or text.startswith("-"):
            return f"(-{text.lstrip('-')})"
        return text
    if isinstance(node, (Coord, Param)):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            if isinstance(node.arg, Const) and not str(render(node.arg)).startswith("("):
                return f"(-({render(node.arg)}))"
            return f"(-{render(node.arg)})"
        return f"{node.op}({render(node.arg)})"
    return f"({render(node.left)} {node.op} {render(node.right)})"


def walk(node: Node):
    """Yield every node of the tree in pre-order."""
    yield node
    if isinstance(node, Unary):
        yield from walk(node.arg)
    elif isinstance(node, Binary):
        yield from walk(node.left)
        yield from walk(node.right)
