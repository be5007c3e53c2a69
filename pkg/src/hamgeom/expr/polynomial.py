"""Sparse multivariate polynomials with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from numbers import Number
from typing import Iterable, Mapping, Sequence, Union

Coefficient = Union[Fraction, float]


def _coerce(c) -> Coefficient:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    return c


class Polynomial:
    """Polynomial in ``n`` variables stored as ``{exponent tuple: coefficient}``.

    Zero coefficients are dropped on construction, so two polynomials are
    equal exactly when their term maps are equal.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[tuple, Coefficient] | Iterable = ()):
        self.n = n
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[tuple, Coefficient] = {}
        for mono, c in items:
            mono = tuple(int(e) for e in mono)
            if len(mono) != n or any(e < 0 for e in mono):
                raise ValueError(f"bad exponent {mono} for {n} variables")
            acc[mono] = acc.get(mono, 0) + _coerce(c)
        self._terms = {m: c for m, c in acc.items() if c != 0}

    @classmethod
    def constant(cls, n: int, c) -> "Polynomial":
        return cls(n, {(0,) * n: c})

    @classmethod
    def variable(cls, n: int, i: int) -> "Polynomial":
        mono = [0] * n
        mono[i] = 1
        return cls(n, {tuple(mono): 1})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((sum(m) for m in self._terms), default=0)

    def max_abs_coefficient(self) -> float:
        return max((abs(float(c)) for c in self._terms.values()), default=0.0)

    def __eq__(self, other) -> bool:
        if isinstance(other, Number) and not isinstance(other, Polynomial):
            other = Polynomial.constant(self.n, other)
        return isinstance(other, Polynomial) and self.n == other.n and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.n, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        if not self._terms:
            return "Polynomial(0)"
        parts = []
        for mono, c in sorted(self._terms.items(), reverse=True):
            factors = [f"x{i}^{e}" if e > 1 else f"x{i}" for i, e in enumerate(mono) if e]
            parts.append("*".join([str(c)] + factors))
        return "Polynomial(" + " + ".join(parts) + ")"

    def _lift(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.n != self.n:
                raise ValueError("polynomials over different numbers of variables")
            return other
        return Polynomial.constant(self.n, other)

    def __add__(self, other) -> "Polynomial":
        other = self._lift(other)
        return Polynomial(self.n, list(self._terms.items()) + list(other._terms.items()))

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.n, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._lift(other) - self

    def __mul__(self, other) -> "Polynomial":
        other = self._lift(other)
        out = []
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                out.append((tuple(a + b for a, b in zip(m1, m2)), c1 * c2))
        return Polynomial(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers need a non-negative integer exponent")
        result = Polynomial.constant(self.n, 1)
        for _ in range(k):
            result = result * self
        return result

    def partial(self, axis: int) -> "Polynomial":
        if not 0 <= axis < self.n:
            raise IndexError(f"axis {axis} out of range for {self.n} variables")
        out = {}
        for mono, c in self._terms.items():
            e = mono[axis]
            if e:
                m = list(mono)
                m[axis] = e - 1
                out[tuple(m)] = c * e
        return Polynomial(self.n, out)

    def __call__(self, x: Sequence[float]) -> float:
        total = 0.0
        for mono, c in self._terms.items():
            term = float(c)
            for xi, e in zip(x, mono):
                if e:
                    term *= xi**e
            total += term
        return total


def poly_partial(p: Polynomial, axis: int) -> Polynomial:
    return p.partial(axis)
