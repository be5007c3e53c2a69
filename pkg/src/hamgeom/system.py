"""Hamiltonian systems on a Poisson chart and the sampled structure checks."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from hamgeom.expr import DomainError, Expression, NotPolynomialError
from hamgeom.expr import dual
from hamgeom.poisson import (
    BivectorField,
    bracket_eval,
    coordinate_jacobiators,
    hamiltonian_vector,
    schouten_self_bracket,
)

log = logging.getLogger(__name__)

DEFAULT_SEED = 42
DEFAULT_BOX = (-2.0, 2.0)
SINGULAR_EPS = 1e-6
CASIMIR_TOL = 1e-8


class CheckError(RuntimeError):
    """A sampled check could not be carried out (too many skipped points)."""


@dataclass
class CheckReport:
    check: str
    passed: bool
    tolerance: float
    samples: int
    seed: int
    max_residual: float
    worst_point: list[float] | None
    skipped: int = 0
    detail: str = ""

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "seed": self.seed,
            "max_residual": self.max_residual,
            "worst_point": self.worst_point,
            "skipped": self.skipped,
            "detail": self.detail,
        }


class PoissonSystem:
    """A chart with a bivector, a Hamiltonian and declared invariants.

    ``casimirs`` and ``integrals`` map names to expressions.  Every declared
    Casimir is checked at construction.  ``singular_locus`` is an expression
    that must be non-zero at admissible points; ``sample_box`` gives the
    ``(lo, hi)`` range per coordinate used by the sampled checks.
    """

    def __init__(
        self,
        bivector: BivectorField,
        hamiltonian: Expression,
        casimirs: Mapping[str, Expression] | None = None,
        integrals: Mapping[str, Expression] | None = None,
        singular_locus: Expression | None = None,
        canonical_separable: bool = False,
        sample_box: Sequence[tuple[float, float]] | None = None,
        name: str = "system",
        verify: bool = True,
    ):
        self.name = name
        self.bivector = bivector
        self.coordinates = bivector.coordinates
        self.parameters = bivector.parameters
        self.hamiltonian = hamiltonian
        self.casimirs = dict(casimirs or {})
        self.integrals = dict(integrals or {})
        self.singular_locus = singular_locus
        self.canonical_separable = canonical_separable
        n = len(self.coordinates)
        if sample_box is None:
            sample_box = [DEFAULT_BOX] * n
        self.sample_box = [tuple(map(float, b)) for b in sample_box]
        if len(self.sample_box) != n:
            raise ValueError("sample box needs one (lo, hi) pair per coordinate")
        for label, e in self.invariants().items():
            if e.coordinates != self.coordinates:
                raise ValueError(f"{label} is not over the chart {self.coordinates}")
        if hamiltonian.coordinates != self.coordinates:
            raise ValueError("hamiltonian is not over the system chart")
        if canonical_separable and bivector.origin[0] != "canonical":
            raise ValueError("canonical-separable systems need the canonical bivector")
        self._h = hamiltonian.bind(self.parameters)
        self._locus = singular_locus.bind(self.parameters) if singular_locus is not None else None
        self._bound = {name: e.bind(self.parameters) for name, e in self.invariants().items()}
        if verify:
            for cname, c in self.casimirs.items():
                report = check_casimir(self, c, tol=CASIMIR_TOL)
                if not report.passed:
                    raise ValueError(
                        f"declared Casimir {cname!r} fails: residual {report.max_residual:.3g} at {report.worst_point}"
                    )

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    def invariants(self) -> dict[str, Expression]:
        """Hamiltonian (as ``H``), Casimirs and integrals by name."""
        out = {"H": self.hamiltonian}
        out.update(self.casimirs)
        out.update(self.integrals)
        return out

    def invariant_value(self, name: str, x) -> float:
        if name not in self._bound:
            raise KeyError(f"unknown invariant {name!r}; known: {sorted(self._bound)}")
        return self._bound[name].value(x)

    def admissible(self, x) -> bool:
        if self._locus is None:
            return True
        try:
            return abs(self._locus.value(x)) > SINGULAR_EPS
        except DomainError:
            return False

    def energy(self, x) -> float:
        return self._h.value(x)

    def energy_gradient(self, x) -> tuple:
        return self._h.value_grad(x)[1]

    def vector_field(self, x) -> list[float]:
        """``ẋ = X_H(x)``; plain floats in, plain floats out (the integrator hot path)."""
        _, dh = self._h.value_grad(x)
        out = [0.0] * len(x)
        for i, j, v in self.bivector.entry_values(x):
            out[i] += v * dh[j]
            out[j] -= v * dh[i]
        return out

    def vector_field_generic(self, x):
        """``X_H`` evaluated on duals, for exact Jacobians."""
        dh = dual.gradient(self._h.value, x)
        out = [0.0] * len(x)
        for i, j, v in self.bivector.entry_values(x):
            out[i] = out[i] + v * dh[j]
            out[j] = out[j] - v * dh[i]
        return out

    def jacobian(self, x) -> np.ndarray:
        """Exact Jacobian of the vector field via forward-mode duals."""
        n = len(x)
        tag = dual.new_tag()
        seeded = [dual.Dual(tag, float(xi), tuple(1.0 if j == i else 0.0 for j in range(n))) for i, xi in enumerate(x)]
        out = self.vector_field_generic(seeded)
        jac = np.zeros((n, n))
        for r, v in enumerate(out):
            if isinstance(v, dual.Dual) and v.tag == tag:
                jac[r] = [dual.primal(e) for e in v.eps]
        return jac


def hamiltonian_vf(sys: PoissonSystem, x) -> np.ndarray:
    return hamiltonian_vector(sys.bivector, sys.hamiltonian, x)


# -- sampling ----------------------------------------------------------------


def sample_points(sys_or_pi, count: int, seed: int = DEFAULT_SEED, box=None):
    """Seeded uniform samples from the box, skipping the singular locus.

    Points on the singular locus are redrawn, so exactly ``count`` points are
    returned (at most ``50 * count`` draws).
    """
    if isinstance(sys_or_pi, PoissonSystem):
        n = sys_or_pi.dimension
        box = box or sys_or_pi.sample_box
        admissible = sys_or_pi.admissible
    else:
        n = sys_or_pi.dimension
        box = box or [DEFAULT_BOX] * n
        admissible = lambda x: True  # noqa: E731
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    points = []
    draws = 0
    while len(points) < count:
        draws += 1
        if draws > 50 * max(count, 1):
            raise CheckError("could not draw enough admissible sample points")
        x = (lo + (hi - lo) * rng.random(n)).tolist()
        if admissible(x):
            points.append(x)
    return points


def _structure(sys_or_pi):
    if isinstance(sys_or_pi, PoissonSystem):
        return sys_or_pi.bivector
    return sys_or_pi


def _run_sampled(name, sys_or_pi, residual, samples, seed, tol, box=None) -> CheckReport:
    worst, worst_point, skipped = 0.0, None, 0
    for x in sample_points(sys_or_pi, samples, seed, box):
        try:
            r = residual(x)
        except DomainError as exc:
            skipped += 1
            log.warning("%s: skipping sample %s: %s", name, x, exc)
            continue
        if not math.isfinite(r):
            r = math.inf
        if worst_point is None or r > worst:
            worst, worst_point = r, x
    if skipped * 2 > samples:
        raise CheckError(f"{name}: {skipped} of {samples} sample points were outside the domain")
    return CheckReport(name, worst <= tol, tol, samples, seed, worst, worst_point, skipped)


def check_casimir(sys_or_pi, c: Expression, samples: int = 100, seed: int = DEFAULT_SEED, tol: float = 1e-8, box=None) -> CheckReport:
    """Residual ``‖π^♯ dC‖_∞`` over seeded samples."""
    pi = _structure(sys_or_pi)

    def residual(x):
        return float(np.max(np.abs(hamiltonian_vector(pi, c, x)), initial=0.0))

    return _run_sampled("casimir", sys_or_pi, residual, samples, seed, tol, box)


def involution_check(sys_or_pi, functions: Sequence[Expression], samples: int = 100, seed: int = DEFAULT_SEED, tol: float = 1e-8, box=None) -> CheckReport:
    """Max ``|{f_i, f_j}|`` over all pairs ``i < j`` and seeded samples."""
    pi = _structure(sys_or_pi)
    pairs = list(itertools.combinations(functions, 2))

    def residual(x):
        return max((abs(bracket_eval(pi, f, g, x)) for f, g in pairs), default=0.0)

    return _run_sampled("involution", sys_or_pi, residual, samples, seed, tol, box)


def jacobi_check(sys_or_pi, samples: int = 100, seed: int = DEFAULT_SEED, tol: float = 1e-9, box=None) -> CheckReport:
    """Max jacobiator of coordinate triples over seeded samples."""
    pi = _structure(sys_or_pi)

    def residual(x):
        return max((abs(v) for v in coordinate_jacobiators(pi, x).values()), default=0.0)

    return _run_sampled("jacobi", sys_or_pi, residual, samples, seed, tol, box)


def schouten_check(sys_or_pi) -> CheckReport:
    """Exact check that the self-bracket trivector is the zero polynomial."""
    pi = _structure(sys_or_pi)
    try:
        components = schouten_self_bracket(pi)
    except NotPolynomialError as exc:
        raise CheckError(f"schouten: bivector is not polynomial ({exc})") from exc
    worst, where = 0.0, None
    for ijk, poly in components.items():
        if not poly.is_zero() and (where is None or poly.max_abs_coefficient() > worst):
            worst, where = poly.max_abs_coefficient(), ijk
    detail = ""
    if where is not None:
        names = [pi.coordinates[i] for i in where]
        detail = f"nonzero component T^({','.join(names)}) = {components[where]}"
    return CheckReport("schouten", where is None, 0.0, 0, 0, worst, None, 0, detail)
