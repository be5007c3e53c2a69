"""Tagged dual numbers for nested forward-mode differentiation.

A :class:`Dual` carries a value and a tuple of tangent components.  Both may
themselves be duals of a *lower* tag, which is how second derivatives are
taken: the outer differentiation seeds tag ``t``, the inner one seeds a
fresh tag ``u > t``, and arithmetic always treats the operand with the
highest tag as the active one.  Fresh tags come from a global counter, so
perturbations from different differentiation passes are never confused.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Sequence

_tags = itertools.count(1)


def new_tag() -> int:
    return next(_tags)


class Dual:
    __slots__ = ("tag", "val", "eps")

    def __init__(self, tag: int, val, eps: tuple):
        self.tag = tag
        self.val = val
        self.eps = eps

    def __repr__(self) -> str:
        return f"Dual(tag={self.tag}, val={self.val!r}, eps={self.eps!r})"

    def _split(self, other):
        """Return (tag, a_val, a_eps, b_val, b_eps) with None for a constant side."""
        if isinstance(other, Dual) and other.tag > self.tag:
            return other.tag, self, None, other.val, other.eps
        if isinstance(other, Dual) and other.tag == self.tag:
            return self.tag, self.val, self.eps, other.val, other.eps
        return self.tag, self.val, self.eps, other, None

    def __neg__(self):
        return Dual(self.tag, -self.val, tuple(-e for e in self.eps))

    def __pos__(self):
        return self

    def __add__(self, other):
        tag, a, da, b, db = self._split(other)
        if da is None:
            return Dual(tag, a + b, db)
        if db is None:
            return Dual(tag, a + b, da)
        return Dual(tag, a + b, tuple(x + y for x, y in zip(da, db)))

    __radd__ = __add__

    def __sub__(self, other):
        tag, a, da, b, db = self._split(other)
        if da is None:
            return Dual(tag, a - b, tuple(-y for y in db))
        if db is None:
            return Dual(tag, a - b, da)
        return Dual(tag, a - b, tuple(x - y for x, y in zip(da, db)))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        tag, a, da, b, db = self._split(other)
        if da is None:
            return Dual(tag, a * b, tuple(a * y for y in db))
        if db is None:
            return Dual(tag, a * b, tuple(x * b for x in da))
        return Dual(tag, a * b, tuple(x * b + a * y for x, y in zip(da, db)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        tag, a, da, b, db = self._split(other)
        q = a / b
        if da is None:
            return Dual(tag, q, tuple(-q * y / b for y in db))
        if db is None:
            return Dual(tag, q, tuple(x / b for x in da))
        return Dual(tag, q, tuple((x - q * y) / b for x, y in zip(da, db)))

    def __rtruediv__(self, other):
        q = other / self.val
        return Dual(self.tag, q, tuple(-q * y / self.val for y in self.eps))

    def chain(self, value, slope):
        """Apply a scalar function with the given value and derivative."""
        return Dual(self.tag, value, tuple(slope * e for e in self.eps))


def primal(x) -> float:
    while isinstance(x, Dual):
        x = x.val
    return x


def is_constant_zero(x) -> bool:
    """True for a plain zero or a dual whose value and tangents all vanish."""
    if isinstance(x, Dual):
        return is_constant_zero(x.val) and all(is_constant_zero(e) for e in x.eps)
    return x == 0


# Generic elementary functions.  Each works on floats and on (nested) duals.


def sin(x):
    if isinstance(x, Dual):
        return x.chain(sin(x.val), cos(x.val))
    return math.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return x.chain(cos(x.val), -sin(x.val))
    return math.cos(x)


def tan(x):
    if isinstance(x, Dual):
        t = tan(x.val)
        return x.chain(t, 1 + t * t)
    return math.tan(x)


def arctan(x):
    if isinstance(x, Dual):
        return x.chain(arctan(x.val), 1 / (1 + x.val * x.val))
    return math.atan(x)


def exp(x):
    if isinstance(x, Dual):
        e = exp(x.val)
        return x.chain(e, e)
    return math.exp(x)


def log(x):
    if isinstance(x, Dual):
        return x.chain(log(x.val), 1 / x.val)
    return math.log(x)


def sqrt(x):
    if isinstance(x, Dual):
        s = sqrt(x.val)
        return x.chain(s, 0.5 / s)
    return math.sqrt(x)


def ipow(x, n: int):
    """Integer power; ``n`` is a plain int."""
    if isinstance(x, Dual):
        if n == 0:
            return Dual(x.tag, ipow(x.val, 0), tuple(0.0 * e for e in x.eps))
        return x.chain(ipow(x.val, n), n * ipow(x.val, n - 1))
    if n < 0:
        return 1.0 / x ** (-n)
    return x**n


def rpow(x, c: float):
    """Real power with a constant exponent; base must be positive (or zero with c > 0)."""
    if isinstance(x, Dual):
        return x.chain(rpow(x.val, c), c * rpow(x.val, c - 1))
    return x**c


def gradient(fn: Callable[[Sequence], object], x: Sequence) -> tuple:
    """Forward-mode gradient of ``fn`` at ``x``.

    ``x`` may already contain duals of lower tags; the result then carries
    those perturbations, which is what nested differentiation relies on.
    """
    n = len(x)
    tag = new_tag()
    seeded = [
        Dual(tag, xi, tuple(1.0 if j == i else 0.0 for j in range(n))) for i, xi in enumerate(x)
    ]
    out = fn(seeded)
    if isinstance(out, Dual) and out.tag == tag:
        return out.eps
    return tuple(0.0 for _ in range(n))


def value_and_gradient(fn, x: Sequence):
    n = len(x)
    tag = new_tag()
    seeded = [
        Dual(tag, xi, tuple(1.0 if j == i else 0.0 for j in range(n))) for i, xi in enumerate(x)
    ]
    out = fn(seeded)
    if isinstance(out, Dual) and out.tag == tag:
        return out.val, out.eps
    return out, tuple(0.0 for _ in range(n))
