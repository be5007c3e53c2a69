"""Bivector fields, brackets and the Jacobi identity on a coordinate chart.

Conventions used throughout the package:

* ``{f, g} = Σ_{i<j} π^{ij} (∂_i f ∂_j g − ∂_j f ∂_i g)``, with ``π^{ji} = −π^{ij}``.
* Dynamics is ``ḟ = {f, H}``.  The Hamiltonian vector field is the generator
  of that flow, ``X_H^j = {x_j, H} = Σ_i π^{ji} ∂_i H``, so for the canonical
  structure ``q̇ = ∂H/∂p`` and ``ṗ = −∂H/∂q``.  With this convention
  ``[X_f, X_g] = −X_{f,g}``.
"""

from __future__ import annotations

import itertools
from typing import Callable, Mapping, Sequence

import numpy as np

from hamgeom.expr import Expression, NotPolynomialError, Polynomial
from hamgeom.expr import dual
from hamgeom.expr.nodes import Binary, Const, Coord, Node

# Largest Jacobi-identity violation tolerated in structure constants.
STRUCTURE_JACOBI_TOL = 1e-12


class BivectorField:
    """Skew coefficient array ``π^{ij}`` of expressions on an ``n``-dimensional chart.

    Only entries with ``i < j`` are stored (0-based); missing entries are zero.
    Antisymmetry is therefore structural.  ``origin`` records how the field
    was built (``("canonical", n)``, ``("lie_poisson", constants)`` or
    ``("expressions",)``) so that it can be serialised faithfully.
    """

    def __init__(
        self,
        coordinates: Sequence[str],
        entries: Mapping[tuple[int, int], Expression],
        parameters: Mapping[str, float] | None = None,
        origin: tuple = ("expressions",),
    ):
        self.coordinates = tuple(coordinates)
        self.parameters = dict(parameters or {})
        n = len(self.coordinates)
        clean = {}
        for (i, j), e in entries.items():
            if not (0 <= i < j < n):
                raise ValueError(f"bivector entry ({i}, {j}) must satisfy 0 <= i < j < {n}")
            if e.coordinates != self.coordinates:
                raise ValueError(f"entry ({i}, {j}) is not over the chart {self.coordinates}")
            clean[(i, j)] = e
        self.entries = dict(sorted(clean.items()))
        self.origin = origin
        self._bound = {ij: e.bind(self.parameters) for ij, e in self.entries.items()}
        self._constant = {
            ij: b.value([0.0] * n) for ij, b in self._bound.items() if not b.expr.free_coordinates
        }
        self._polys = None

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    def __repr__(self) -> str:
        body = ", ".join(f"{self.coordinates[i]}^{self.coordinates[j]}: {e}" for (i, j), e in self.entries.items())
        return f"BivectorField({body})"

    def entry_values(self, x) -> list[tuple[int, int, object]]:
        """``(i, j, π^{ij}(x))`` for every stored entry; generic over duals."""
        out = []
        for ij, b in self._bound.items():
            c = self._constant.get(ij)
            out.append((ij[0], ij[1], c if c is not None else b.value(x)))
        return out

    def matrix_at(self, x) -> np.ndarray:
        n = self.dimension
        m = np.zeros((n, n))
        for i, j, v in self.entry_values(list(map(float, x))):
            m[i, j] = v
            m[j, i] = -v
        return m

    def polynomial_entries(self) -> dict[tuple[int, int], Polynomial]:
        """Exact polynomial form of every entry; raises if any entry is not polynomial."""
        if self._polys is None:
            self._polys = {ij: e.to_polynomial(self.parameters) for ij, e in self.entries.items()}
        return self._polys

    def is_polynomial(self) -> bool:
        try:
            self.polynomial_entries()
        except NotPolynomialError:
            return False
        return True


def canonical_bivector(n: int, coordinates: Sequence[str] | None = None) -> BivectorField:
    """``Σ_i ∂_{q_i} ∧ ∂_{p_i}`` on the chart ``(q_1..q_n, p_1..p_n)``."""
    if n < 1:
        raise ValueError("half-dimension must be at least 1")
    if coordinates is None:
        coordinates = [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
        if n == 1:
            coordinates = ["q", "p"]
    if len(coordinates) != 2 * n:
        raise ValueError(f"canonical chart needs {2 * n} coordinate names")
    one = Expression.constant(1.0, coordinates)
    return BivectorField(coordinates, {(i, n + i): one for i in range(n)}, origin=("canonical", n))


# -- brackets ----------------------------------------------------------------

Function = Callable[[Sequence], object]


def as_function(f, pi: BivectorField) -> Function:
    """Turn an :class:`Expression` into a generic callable with π's parameters bound."""
    if isinstance(f, Expression):
        if f.coordinates != pi.coordinates:
            raise ValueError(f"expression chart {f.coordinates} differs from {pi.coordinates}")
        return f.bind(pi.parameters).value
    return f


def _pair(pi: BivectorField, df: Sequence, dg: Sequence, x) -> object:
    total = 0.0
    for i, j, v in pi.entry_values(x):
        total = total + v * (df[i] * dg[j] - df[j] * dg[i])
    return total


def bracket_function(pi: BivectorField, f, g) -> Function:
    """The function ``{f, g}`` as a generic callable (differentiable again)."""
    F, G = as_function(f, pi), as_function(g, pi)

    def bracket(x):
        return _pair(pi, dual.gradient(F, x), dual.gradient(G, x), x)

    return bracket


def bracket_eval(pi: BivectorField, f, g, x) -> float:
    """``{f, g}(x)``; ``f`` and ``g`` may be expressions or generic callables."""
    x = [float(v) for v in x]
    if isinstance(f, Expression) and isinstance(g, Expression):
        _, df = f.bind(pi.parameters).value_grad(x)
        _, dg = g.bind(pi.parameters).value_grad(x)
        return float(_pair(pi, df, dg, x))
    return float(dual.primal(bracket_function(pi, f, g)(x)))


def hamiltonian_vector(pi: BivectorField, h, x) -> np.ndarray:
    """``X_h(x)`` with components ``Σ_i π^{ji} ∂_i h``, the velocity of ``ẋ = {x, h}``."""
    x = [float(v) for v in x]
    if isinstance(h, Expression):
        _, dh = h.bind(pi.parameters).value_grad(x)
    else:
        dh = [dual.primal(c) for c in dual.gradient(h, x)]
    return _vector_from_gradient(pi, dh, x)


def _vector_from_gradient(pi: BivectorField, dh, x) -> np.ndarray:
    out = np.zeros(pi.dimension)
    for i, j, v in pi.entry_values(x):
        out[i] += v * dh[j]
        out[j] -= v * dh[i]
    return out


def sharp(pi: BivectorField, covector, x) -> np.ndarray:
    """``π^♯(α)`` with components ``Σ_i π^{ij} α_i`` (so ``X_C = −π^♯ dC``)."""
    return -_vector_from_gradient(pi, covector, x)


def jacobiator(pi: BivectorField, f, g, h, x) -> float:
    """``{f,{g,h}} + {h,{f,g}} + {g,{h,f}}`` at ``x``.

    The inner brackets are kept as differentiable callables, so the outer
    bracket differentiates through the bivector coefficients with nested
    forward-mode duals.
    """
    F, G, Hh = (as_function(e, pi) for e in (f, g, h))
    x = [float(v) for v in x]
    total = (
        bracket_function(pi, F, bracket_function(pi, G, Hh))(x)
        + bracket_function(pi, Hh, bracket_function(pi, F, G))(x)
        + bracket_function(pi, G, bracket_function(pi, Hh, F))(x)
    )
    return float(dual.primal(total))


def coordinate_function(pi: BivectorField, i: int) -> Expression:
    return Expression.coordinate(pi.coordinates[i], pi.coordinates)


def coordinate_jacobiators(pi: BivectorField, x) -> dict[tuple[int, int, int], float]:
    """Jacobiator of every coordinate triple ``i < j < k`` at ``x``."""
    coords = [coordinate_function(pi, i) for i in range(pi.dimension)]
    return {
        (i, j, k): jacobiator(pi, coords[i], coords[j], coords[k], x)
        for i, j, k in itertools.combinations(range(pi.dimension), 3)
    }


def schouten_self_bracket(pi: BivectorField) -> dict[tuple[int, int, int], Polynomial]:
    """Trivector components ``T^{ijk}`` (``i < j < k``) of the self-bracket of π.

    ``T^{ijk} = Σ_r (π^{ir} ∂_r π^{jk} + π^{jr} ∂_r π^{ki} + π^{kr} ∂_r π^{ij})``,
    which equals the jacobiator of the coordinate functions ``x_i, x_j, x_k``.
    π is Poisson iff every component is the zero polynomial.
    """
    polys = pi.polynomial_entries()
    n = pi.dimension
    zero = Polynomial(n)

    def p(a: int, b: int) -> Polynomial:
        if a < b:
            return polys.get((a, b), zero)
        if a > b:
            return -polys.get((b, a), zero)
        return zero

    out = {}
    for i, j, k in itertools.combinations(range(n), 3):
        total = zero
        for r in range(n):
            for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
                par = p(a, r)
                if not par.is_zero():
                    total = total + par * p(b, c).partial(r)
        out[(i, j, k)] = total
    return out


def is_poisson_exact(pi: BivectorField) -> bool:
    return all(t.is_zero() for t in schouten_self_bracket(pi).values())


def rank_at(pi: BivectorField, x, tol: float = 1e-10) -> int:
    s = np.linalg.svd(pi.matrix_at(x), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    r = int(np.sum(s > tol * s[0]))
    assert r % 2 == 0, f"skew matrix with odd numerical rank {r}: singular values {s}"
    return r


# -- Lie-Poisson structures --------------------------------------------------


class StructureConstants:
    """Structure constants ``c[k][i][j]`` of a Lie algebra: ``[e_i, e_j] = Σ_k c^k_{ij} e_k``."""

    def __init__(self, c, tol: float = STRUCTURE_JACOBI_TOL):
        c = np.array(c, dtype=float)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]):
            raise ValueError(f"structure constants need shape (m, m, m), got {c.shape}")
        if not np.array_equal(c, -np.transpose(c, (0, 2, 1))):
            raise ValueError("structure constants are not antisymmetric in the lower indices")
        self.c = c
        self.c.setflags(write=False)
        worst, where = self.jacobi_violation()
        if worst > tol:
            i, j, k, l = where
            raise ValueError(
                f"structure constants violate the Jacobi identity by {worst:.3g} at (i,j,k,l)=({i},{j},{k},{l})"
            )

    @property
    def dimension(self) -> int:
        return self.c.shape[0]

    def jacobi_violation(self) -> tuple[float, tuple[int, int, int, int]]:
        """Max over (i,j,k,l) of |Σ_m c^m_ij c^l_mk + c^m_jk c^l_mi + c^m_ki c^l_mj|."""
        c = self.c
        # c[m, i, j] = c^m_ij ; term1[i,j,k,l] = Σ_m c^m_ij c^l_mk
        t1 = np.einsum("mij,lmk->ijkl", c, c)
        total = t1 + np.transpose(t1, (1, 2, 0, 3)) + np.transpose(t1, (2, 0, 1, 3))
        if total.size == 0:
            return 0.0, (0, 0, 0, 0)
        idx = np.unravel_index(np.argmax(np.abs(total)), total.shape)
        return float(np.abs(total[idx])), tuple(int(v) for v in idx)

    @classmethod
    def so3(cls, sign: float = 1.0) -> "StructureConstants":
        """``c^k_{ij} = sign · ε_{ijk}`` (the cross product when ``sign = 1``)."""
        eps = np.zeros((3, 3, 3))
        for i, j, k in itertools.permutations(range(3)):
            eps[k, i, j] = np.linalg.det(np.eye(3)[[i, j, k]])
        return cls(sign * eps + 0.0)  # + 0.0 clears negative zeros


def lie_poisson_from_constants(c: StructureConstants, coordinates: Sequence[str]) -> BivectorField:
    """Linear bivector ``π^{ij}(ξ) = Σ_k c^k_{ij} ξ_k`` on the dual of the algebra."""
    if not isinstance(c, StructureConstants):
        c = StructureConstants(c)
    coordinates = tuple(coordinates)
    m = c.dimension
    if len(coordinates) != m:
        raise ValueError(f"need {m} coordinate names, got {len(coordinates)}")
    entries = {}
    for i, j in itertools.combinations(range(m), 2):
        node: Node | None = None
        for k in range(m):
            coef = float(c.c[k, i, j])
            if coef == 0:
                continue
            term: Node = Coord(coordinates[k], k)
            if coef != 1:
                term = Binary("*", Const(coef), term)
            node = term if node is None else Binary("+", node, term)
        if node is not None:
            entries[(i, j)] = Expression(node, coordinates)
    return BivectorField(coordinates, entries, origin=("lie_poisson", c))
