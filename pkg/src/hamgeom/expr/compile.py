"""Compile syntax trees into straight-line Python functions.

Two forms are produced for every tree:

``value(x, p)``
    Generic evaluation.  Arithmetic goes through Python operators and the
    elementary functions through :mod:`hamgeom.expr.dual`, so the same code
    runs on floats and on (nested) dual numbers.

``value_grad(x, p)``
    Float-only forward-mode sweep returning ``(value, gradient)``.  Every
    node gets one variable per non-zero tangent component; components that
    are structurally zero are pruned at compile time.

Both forms perform identical floating-point operations for the value, so
they agree bit-for-bit.
"""

from __future__ import annotations

import math

from hamgeom.expr import dual as D
from hamgeom.expr.errors import DomainError
from hamgeom.expr.nodes import Binary, Const, Coord, Node, Param, Unary, render


# -- runtime helpers shared by both compiled forms ---------------------------


def _div(a, b, t):
    if D.primal(b) == 0:
        raise DomainError("division by zero", t)
    return a / b


def _log(a, t):
    if not D.primal(a) > 0:
        raise DomainError("log of non-positive value", t)
    return D.log(a)


def _sqrt(a, t):
    pa = D.primal(a)
    if pa < 0:
        raise DomainError("sqrt of negative value", t)
    if pa == 0 and isinstance(a, D.Dual):
        raise DomainError("derivative of sqrt at zero", t)
    return D.sqrt(a)


def _exp(a, t):
    try:
        return D.exp(a)
    except OverflowError:
        raise DomainError("exp overflow", t) from None


def _check_pow(pa: float, c: float | None, need_da: bool, t: str) -> None:
    """Domain rules for ``a ^ b``; ``c`` is the exponent if it is constant."""
    if c is None:
        if not pa > 0:
            raise DomainError("variable exponent requires a positive base", t)
        return
    if float(c).is_integer():
        if pa == 0 and c < 0:
            raise DomainError("division by zero", t)
        return
    if pa < 0:
        raise DomainError("non-integer power of negative value", t)
    if pa == 0 and (c < 0 or (need_da and c < 1)):
        raise DomainError("power singular at zero", t)


def _pow(a, b, t):
    if isinstance(b, D.Dual):
        _check_pow(D.primal(a), None, True, t)
        return _exp(b * D.log(a), t)
    _check_pow(D.primal(a), b, isinstance(a, D.Dual), t)
    try:
        if float(b).is_integer():
            return D.ipow(a, int(b))
        return D.rpow(a, b)
    except OverflowError:
        raise DomainError("power overflow", t) from None


def _float_pow(a, b):
    if float(b).is_integer():
        n = int(b)
        return 1.0 / a ** (-n) if n < 0 else a**n
    return a**b


def _fpow(a, b, t, want_da, want_db):
    """Float power returning (value, d/da, d/db)."""
    _check_pow(a, None if want_db else b, want_da, t)
    try:
        v = _float_pow(a, b)
        da = db = 0.0
        if want_da and b != 0:
            da = b * _float_pow(a, b - 1)
        if want_db:
            db = v * math.log(a)
        return v, da, db
    except OverflowError:
        raise DomainError("power overflow", t) from None


def _fsin(a, t):
    return math.sin(a), math.cos(a)


def _fcos(a, t):
    return math.cos(a), -math.sin(a)


def _ftan(a, t):
    v = math.tan(a)
    return v, 1 + v * v


def _farctan(a, t):
    return math.atan(a), 1 / (1 + a * a)


def _fexp(a, t):
    try:
        v = math.exp(a)
    except OverflowError:
        raise DomainError("exp overflow", t) from None
    return v, v


def _flog(a, t):
    if not a > 0:
        raise DomainError("log of non-positive value", t)
    return math.log(a), 1 / a


def _fsqrt(a, t):
    if a < 0:
        raise DomainError("sqrt of negative value", t)
    v = math.sqrt(a)
    if v == 0:
        raise DomainError("derivative of sqrt at zero", t)
    return v, 0.5 / v


def _fsqrt_value(a, t):
    if a < 0:
        raise DomainError("sqrt of negative value", t)
    return math.sqrt(a)


_GENERIC_UNARY = {
    "sin": "_D.sin({a})",
    "cos": "_D.cos({a})",
    "tan": "_D.tan({a})",
    "arctan": "_D.arctan({a})",
    "exp": "_exp({a}, {t})",
    "log": "_log({a}, {t})",
    "sqrt": "_sqrt({a}, {t})",
}

_NAMESPACE = {
    "_D": D,
    "_div": _div,
    "_log": _log,
    "_sqrt": _sqrt,
    "_exp": _exp,
    "_pow": _pow,
    "_fpow": _fpow,
    "_fsin": _fsin,
    "_fcos": _fcos,
    "_ftan": _ftan,
    "_farctan": _farctan,
    "_fexp": _fexp,
    "_flog": _flog,
    "_fsqrt": _fsqrt,
    "_DomainError": DomainError,
}


class _Emitter:
    def __init__(self, params: list[str], n: int):
        self.param_index = {name: i for i, name in enumerate(params)}
        self.n = n
        self.lines: list[str] = []
        self.texts: list[str] = []
        self.counter = 0

    def fresh(self, prefix: str = "v") -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def text_ref(self, node: Node) -> str:
        self.texts.append(render(node))
        return f"_T[{len(self.texts) - 1}]"

    def leaf(self, node: Node) -> str:
        if isinstance(node, Const):
            return repr(float(node.value))
        if isinstance(node, Coord):
            return f"x[{node.index}]"
        return f"p[{self.param_index[node.name]}]"

    # generic value form

    def value(self, node: Node) -> str:
        if isinstance(node, (Const, Coord, Param)):
            return self.leaf(node)
        out = self.fresh()
        if isinstance(node, Unary):
            a = self.value(node.arg)
            if node.op == "neg":
                expr = f"-{a}"
            else:
                expr = _GENERIC_UNARY[node.op].format(a=a, t=self.text_ref(node))
        else:
            a = self.value(node.left)
            b = self.value(node.right)
            if node.op in "+-*":
                expr = f"{a} {node.op} {b}"
            elif node.op == "/":
                expr = f"_div({a}, {b}, {self.text_ref(node)})"
            else:
                expr = f"_pow({a}, {b}, {self.text_ref(node)})"
        self.lines.append(f"    {out} = {expr}")
        return out

    # float forward-mode form

    def grad(self, node: Node) -> tuple[str, list[str | None]]:
        n = self.n
        if isinstance(node, (Const, Param)):
            return self.leaf(node), [None] * n
        if isinstance(node, Coord):
            d: list[str | None] = [None] * n
            d[node.index] = "1.0"
            return self.leaf(node), d
        out = self.fresh()
        emit = self.lines.append
        if isinstance(node, Unary):
            a, da = self.grad(node.arg)
            if node.op == "neg":
                emit(f"    {out} = -{a}")
                return out, [None if e is None else self._assign(f"-{e}") for e in da]
            t = self.text_ref(node)
            if all(e is None for e in da):
                if node.op == "sqrt":
                    emit(f"    {out} = _fsqrt_value({a}, {t})")
                else:
                    emit(f"    {out}, _ = _f{node.op}({a}, {t})")
                return out, [None] * n
            s = self.fresh("s")
            emit(f"    {out}, {s} = _f{node.op}({a}, {t})")
            return out, [None if e is None else self._assign(f"{s} * {e}") for e in da]
        a, da = self.grad(node.left)
        b, db = self.grad(node.right)
        if node.op in "+-":
            emit(f"    {out} = {a} {node.op} {b}")
            d = []
            for x, y in zip(da, db):
                if x is None and y is None:
                    d.append(None)
                elif y is None:
                    d.append(x)
                elif x is None:
                    d.append(y if node.op == "+" else self._assign(f"-{y}"))
                else:
                    d.append(self._assign(f"{x} {node.op} {y}"))
            return out, d
        if node.op == "*":
            emit(f"    {out} = {a} * {b}")
            d = []
            for x, y in zip(da, db):
                terms = []
                if x is not None:
                    terms.append(f"{x} * {b}")
                if y is not None:
                    terms.append(f"{a} * {y}")
                d.append(self._assign(" + ".join(terms)) if terms else None)
            return out, d
        t = self.text_ref(node)
        if node.op == "/":
            emit(f"    if {b} == 0: raise _DomainError('division by zero', {t})")
            emit(f"    {out} = {a} / {b}")
            d = []
            for x, y in zip(da, db):
                if x is None and y is None:
                    d.append(None)
                elif y is None:
                    d.append(self._assign(f"{x} / {b}"))
                elif x is None:
                    d.append(self._assign(f"-{out} * {y} / {b}"))
                else:
                    d.append(self._assign(f"({x} - {out} * {y}) / {b}"))
            return out, d
        want_da = any(e is not None for e in da)
        want_db = any(e is not None for e in db)
        sa, sb = self.fresh("s"), self.fresh("s")
        emit(f"    {out}, {sa}, {sb} = _fpow({a}, {b}, {t}, {want_da}, {want_db})")
        d = []
        for x, y in zip(da, db):
            terms = []
            if x is not None:
                terms.append(f"{sa} * {x}")
            if y is not None:
                terms.append(f"{sb} * {y}")
            d.append(self._assign(" + ".join(terms)) if terms else None)
        return out, d

    def _assign(self, expr: str) -> str:
        name = self.fresh("g")
        self.lines.append(f"    {name} = {expr}")
        return name


def compile_tree(root: Node, n_coords: int, params: list[str]):
    """Return ``(value, value_grad, source)`` for ``root``."""
    em = _Emitter(params, n_coords)
    out = em.value(root)
    value_src = ["def value(x, p):", *em.lines, f"    return {out}"]
    value_texts = em.texts

    em = _Emitter(params, n_coords)
    out, d = em.grad(root)
    grads = ", ".join("0.0" if e is None else e for e in d)
    grad_src = ["def value_grad(x, p):", *em.lines, f"    return {out}, ({grads}{',' if n_coords == 1 else ''})"]
    grad_texts = em.texts

    ns_v = dict(_NAMESPACE, _T=tuple(value_texts))
    ns_g = dict(_NAMESPACE, _T=tuple(grad_texts), _fsqrt_value=_fsqrt_value)
    source_v = "\n".join(value_src)
    source_g = "\n".join(grad_src)
    exec(compile(source_v, "<hamgeom-expr>", "exec"), ns_v)
    exec(compile(source_g, "<hamgeom-expr-grad>", "exec"), ns_g)
    return ns_v["value"], ns_g["value_grad"], source_v + "\n\n" + source_g
