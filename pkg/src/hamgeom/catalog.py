"""Builtin example systems.

Each builder returns a :class:`SystemSpecimen` whose reference facts have
already been checked.  Parameters are plain ``name -> float`` maps; every
specimen has defaults, listed in :data:`DEFAULTS`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from hamgeom.expr import Expression
from hamgeom.poisson import BivectorField, StructureConstants, canonical_bivector, lie_poisson_from_constants
from hamgeom.system import PoissonSystem, check_casimir, involution_check

# Sign of the so(3) structure constants used by the rigid body.  With
# ``ẋ = {x, H}`` the choice c^k_ij = -ε_ijk gives L̇ = L × ∇H, which is the
# component form L̇₁ = (I₂ − I₃)/(I₂ I₃) L₂ L₃ (and cyclic).
EULER_TOP_SO3_SIGN = -1.0

FACT_TOL = 1e-8

DEFAULTS: dict[str, dict[str, float]] = {
    "pendulum": {"g": 9.81, "L": 1.0},
    "harmonic": {"w": 1.0},
    "euler_top": {"I1": 1.0, "I2": 2.0, "I3": 3.0},
    "lotka_volterra": {"a12": 1.0, "eps1": -1.0, "eps2": 2.0},
    "spherical_pendulum": {"g": 9.81},
    "r3_hyperboloid": {},
    "r3_cylinder": {},
}


class SpecimenError(ValueError):
    pass


@dataclass(frozen=True)
class ReferenceFact:
    kind: str  # "casimir" or "involution"
    targets: tuple[str, ...]
    expected: bool


@dataclass
class SystemSpecimen:
    name: str
    system: PoissonSystem
    canonical_separable: bool
    doc: str
    facts: list[ReferenceFact] = field(default_factory=list)
    extras: dict[str, Expression] = field(default_factory=dict)

    def verify_facts(self, tol: float = FACT_TOL) -> None:
        for fact in self.facts:
            exprs = [self.lookup(t) for t in fact.targets]
            if fact.kind == "casimir":
                result = all(check_casimir(self.system, e, tol=tol).passed for e in exprs)
            else:
                result = involution_check(self.system, exprs, tol=tol).passed
            if result != fact.expected:
                raise SpecimenError(f"{self.name}: reference fact {fact} does not hold")

    def lookup(self, name: str) -> Expression:
        known = dict(self.system.invariants())
        known.update(self.extras)
        if name in known:
            return known[name]
        if name in self.system.coordinates:
            return Expression.coordinate(name, self.system.coordinates)
        raise KeyError(f"{self.name} has no function named {name!r}")


def _merge(name: str, params: Mapping[str, float] | None) -> dict[str, float]:
    merged = dict(DEFAULTS[name])
    unknown = sorted(set(params or ()) - set(merged))
    if unknown:
        raise SpecimenError(f"unknown parameter(s) {unknown} for {name}; known: {sorted(merged)}")
    if params:
        merged.update({k: float(v) for k, v in params.items()})
    return merged


def _expr(text: str, coords, params) -> Expression:
    return Expression.parse(text, coords, params)


def pendulum(params=None) -> SystemSpecimen:
    """Planar pendulum in the chart (θ, p) with p = L²ω.

    ``H = p²/(2L²) − gL cos θ`` reproduces θ̈ = −(g/L) sin θ.  The energy with
    ``+gL cos θ`` is not conserved by that motion; it is kept as the extra
    function ``H_plus_cos`` so the difference can be demonstrated.
    """
    p = _merge("pendulum", params)
    coords = ["theta", "p"]
    pi = canonical_bivector(1, coords)
    pi = BivectorField(coords, pi.entries, p, pi.origin)
    h = _expr("p^2/(2*L^2) - g*L*cos(theta)", coords, p)
    system = PoissonSystem(pi, h, canonical_separable=True, name="pendulum")
    return SystemSpecimen(
        "pendulum",
        system,
        True,
        "Pendulum of length L under gravity g, canonical chart (theta, p = L^2 omega).",
        [ReferenceFact("involution", ("H",), True), ReferenceFact("casimir", ("theta",), False)],
        {"H_plus_cos": _expr("p^2/(2*L^2) + g*L*cos(theta)", coords, p)},
    )


def harmonic(params=None) -> SystemSpecimen:
    p = _merge("harmonic", params)
    if not p["w"] > 0:
        raise SpecimenError("harmonic oscillator needs w > 0")
    coords = ["q", "p"]
    base = canonical_bivector(1, coords)
    pi = BivectorField(coords, base.entries, p, base.origin)
    h = _expr("p^2/2 + w^2*q^2/2", coords, p)
    system = PoissonSystem(pi, h, canonical_separable=True, name="harmonic")
    return SystemSpecimen(
        "harmonic",
        system,
        True,
        "Harmonic oscillator H = p^2/2 + w^2 q^2/2 on (q, p).",
        [ReferenceFact("involution", ("H",), True), ReferenceFact("casimir", ("q",), False)],
    )


def euler_top(params=None) -> SystemSpecimen:
    p = _merge("euler_top", params)
    if any(p[k] <= 0 for k in ("I1", "I2", "I3")):
        raise SpecimenError("moments of inertia must be positive")
    coords = ["L1", "L2", "L3"]
    lp = lie_poisson_from_constants(StructureConstants.so3(EULER_TOP_SO3_SIGN), coords)
    pi = BivectorField(coords, lp.entries, p, lp.origin)
    h = _expr("L1^2/(2*I1) + L2^2/(2*I2) + L3^2/(2*I3)", coords, p)
    casimir = _expr("(L1^2 + L2^2 + L3^2)/2", coords, p)
    system = PoissonSystem(pi, h, casimirs={"C": casimir}, name="euler_top")
    return SystemSpecimen(
        "euler_top",
        system,
        False,
        "Free rigid body on so(3)*, H = sum L_i^2/(2 I_i), Casimir |L|^2/2.",
        [ReferenceFact("casimir", ("C",), True), ReferenceFact("involution", ("H", "C"), True)],
    )


def lotka_volterra_params(a, eps=None, q=None) -> dict[str, float]:
    """Flatten a skew interaction matrix and growth rates (or an equilibrium) into parameters."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.array_equal(a, -a.T):
        raise SpecimenError("interaction matrix must be square and skew-symmetric")
    n = a.shape[0]
    out = {f"a{i + 1}{j + 1}": float(a[i, j]) for i in range(n) for j in range(i + 1, n)}
    if eps is not None:
        out.update({f"eps{i + 1}": float(v) for i, v in enumerate(eps)})
    if q is not None:
        out.update({f"q{i + 1}": float(v) for i, v in enumerate(q)})
    return out


def lotka_volterra(params=None) -> SystemSpecimen:
    """n-species Lotka-Volterra with skew interactions.

    Parameters: ``a{i}{j}`` for ``i < j`` (``a_ji = -a_ij``) and either the
    growth rates ``eps{i}`` or a positive equilibrium ``q{i}``; ``n`` is the
    number of ``eps``/``q`` entries.  The equilibrium solves
    ``eps + A q = 0`` and must be strictly positive.
    """
    raw = dict(params) if params else dict(DEFAULTS["lotka_volterra"])
    p = {k: float(v) for k, v in raw.items()}
    unknown = sorted(k for k in p if not re.fullmatch(r"a\d\d+|eps\d+|q\d+", k))
    if unknown:
        raise SpecimenError(f"unknown parameter(s) {unknown}; expected a{{i}}{{j}}, eps{{i}} or q{{i}}")
    n = max(
        [int(k[3:]) for k in p if k.startswith("eps")] + [int(k[1:]) for k in p if k.startswith("q")],
        default=0,
    )
    if n < 2:
        raise SpecimenError("Lotka-Volterra needs at least two species")
    a = np.zeros((n, n))
    for k, v in p.items():
        if k.startswith("a"):
            i, j = int(k[1]) - 1, int(k[2:]) - 1
            if not (0 <= i < j < n):
                raise SpecimenError(f"interaction {k} must name i < j <= {n}")
            a[i, j], a[j, i] = v, -v
    if all(f"q{i + 1}" in p for i in range(n)):
        q = np.array([p[f"q{i + 1}"] for i in range(n)])
        eps = -a @ q
        if any(f"eps{i + 1}" in p for i in range(n)):
            given = np.array([p.get(f"eps{i + 1}", math.nan) for i in range(n)])
            if not np.allclose(given, eps, atol=1e-10):
                raise SpecimenError("eps and q are inconsistent with eps + A q = 0")
    else:
        try:
            eps = np.array([p[f"eps{i + 1}"] for i in range(n)])
        except KeyError as exc:
            raise SpecimenError(f"missing growth rate {exc}") from None
        q, *_ = np.linalg.lstsq(a, -eps, rcond=None)
        if np.max(np.abs(eps + a @ q)) > 1e-10:
            raise SpecimenError("no equilibrium solves eps + A q = 0")
    if np.any(q <= 0):
        raise SpecimenError(f"equilibrium {q.tolist()} is not strictly positive")
    for i in range(n):
        p[f"q{i + 1}"] = float(q[i])
        p[f"eps{i + 1}"] = float(eps[i])
    coords = [f"x{i + 1}" for i in range(n)]
    names = list(p)
    entries = {}
    for i in range(n):
        for j in range(i + 1, n):
            key = f"a{i + 1}{j + 1}"
            p.setdefault(key, 0.0)
            names = list(p)
            entries[(i, j)] = _expr(f"{key}*x{i + 1}*x{j + 1}", coords, names)
    pi = BivectorField(coords, entries, p)
    h = _expr(" + ".join(f"(x{i + 1} - q{i + 1}*log(x{i + 1}))" for i in range(n)), coords, names)
    locus = _expr("*".join(coords), coords, names)
    system = PoissonSystem(
        pi,
        h,
        integrals={"h": h},
        singular_locus=locus,
        sample_box=[(0.1, 4.0)] * n,
        name="lotka_volterra",
    )
    return SystemSpecimen(
        "lotka_volterra",
        system,
        False,
        "Lotka-Volterra populations x_i > 0 with bracket a_ij x_i x_j and h = sum(x_i - q_i log x_i).",
        [ReferenceFact("involution", ("H", "h"), True)],
    )


def spherical_pendulum(params=None) -> SystemSpecimen:
    """Spherical pendulum on (θ, ψ, p_θ, p_ψ).

    The Hamiltonian is ``p_ψ²/2 + p_θ²/sin²ψ − g cos ψ``: the azimuthal term
    carries no factor 1/2.  H and p_θ are in involution either way.
    """
    p = _merge("spherical_pendulum", params)
    coords = ["theta", "psi", "p_theta", "p_psi"]
    base = canonical_bivector(2, coords)
    pi = BivectorField(coords, base.entries, p, base.origin)
    h = _expr("p_psi^2/2 + p_theta^2/sin(psi)^2 - g*cos(psi)", coords, p)
    system = PoissonSystem(
        pi,
        h,
        integrals={"p_theta": _expr("p_theta", coords, p)},
        singular_locus=_expr("sin(psi)", coords, p),
        sample_box=[(0.0, 2 * math.pi), (0.2, math.pi - 0.2), (-2.0, 2.0), (-2.0, 2.0)],
        name="spherical_pendulum",
    )
    return SystemSpecimen(
        "spherical_pendulum",
        system,
        False,
        "Spherical pendulum of unit length and mass; integrals H and p_theta.",
        [ReferenceFact("involution", ("H", "p_theta"), True), ReferenceFact("involution", ("H", "psi"), False)],
    )


def r3_hyperboloid(params=None) -> SystemSpecimen:
    p = _merge("r3_hyperboloid", params)
    coords = ["x", "y", "z"]
    pi = BivectorField(
        coords,
        {(0, 1): _expr("z", coords, p), (0, 2): _expr("-2*x", coords, p), (1, 2): _expr("2*y", coords, p)},
        p,
    )
    h = _expr("x", coords, p)
    system = PoissonSystem(pi, h, casimirs={"C": _expr("4*x*y + z^2", coords, p)}, name="r3_hyperboloid")
    return SystemSpecimen(
        "r3_hyperboloid",
        system,
        False,
        "R^3 foliated by the level sets of 4xy + z^2 (hyperboloids and a cone).",
        [ReferenceFact("casimir", ("C",), True), ReferenceFact("casimir", ("x",), False)],
    )


def r3_cylinder(params=None) -> SystemSpecimen:
    p = _merge("r3_cylinder", params)
    coords = ["r", "theta", "z"]
    pi = BivectorField(coords, {(1, 2): _expr("r", coords, p)}, p)
    system = PoissonSystem(
        pi,
        _expr("z", coords, p),
        casimirs={"C": _expr("r", coords, p)},
        singular_locus=_expr("r", coords, p),
        sample_box=[(0.0, 2.0), (0.0, 2 * math.pi), (-2.0, 2.0)],
        name="r3_cylinder",
    )
    return SystemSpecimen(
        "r3_cylinder",
        system,
        False,
        "R^3 in cylindrical coordinates with pi = r d_theta ^ d_z; leaves are cylinders r = c and axis points.",
        [ReferenceFact("casimir", ("C",), True), ReferenceFact("casimir", ("z",), False)],
    )


BUILDERS: dict[str, Callable[..., SystemSpecimen]] = {
    "pendulum": pendulum,
    "harmonic": harmonic,
    "euler_top": euler_top,
    "lotka_volterra": lotka_volterra,
    "spherical_pendulum": spherical_pendulum,
    "r3_hyperboloid": r3_hyperboloid,
    "r3_cylinder": r3_cylinder,
}


def build(name: str, params: Mapping[str, float] | None = None) -> SystemSpecimen:
    if name not in BUILDERS:
        raise SpecimenError(f"unknown specimen {name!r}; available: {', '.join(BUILDERS)}")
    specimen = BUILDERS[name](params)
    specimen.verify_facts()
    return specimen


# -- harmonic oscillator action-angle variables ---------------------------------


class FormulaDomainError(ValueError):
    pass


@dataclass(frozen=True)
class ActionAngle:
    phi: float
    psi: float
    energy: float
    inverse_residual: float


def action_angle(q: float, p: float, w: float = 1.0) -> ActionAngle:
    """Angle φ = w·arctan(q / √(2ψ − q²)) and action ψ = E/w.

    The square root takes the sign of ``p`` so the angle lands in the right
    quadrant (at w = 1 this is ``atan2(q, p)``); the branch cut is the ray
    ``q = 0, p < 0``.  ``inverse_residual`` is the max-norm distance between
    ``(q, p)`` and the point rebuilt from ``(φ, ψ)``.
    """
    if not w > 0:
        raise ValueError("frequency w must be positive")
    if q == 0 and p == 0:
        raise ValueError("action-angle variables are undefined at the origin")
    energy = p * p / 2 + w * w * q * q / 2
    psi = energy / w
    radicand = 2 * psi - q * q
    if radicand < 0:
        raise FormulaDomainError(f"2*psi - q^2 = {radicand:.6g} < 0 for w = {w}")
    sign = 1.0 if p >= 0 else -1.0
    phi = w * math.atan2(q, sign * math.sqrt(radicand))
    qi, pi_ = action_angle_inverse(phi, psi, w)
    return ActionAngle(phi, psi, energy, max(abs(qi - q), abs(pi_ - p)))


def action_angle_inverse(phi: float, psi: float, w: float = 1.0) -> tuple[float, float]:
    """Invert :func:`action_angle`: ``q = √(2ψ) sin(φ/w)``, ``p = ±√(2wψ − w²q²)``."""
    theta = phi / w
    q = math.sqrt(2 * psi) * math.sin(theta)
    radicand = 2 * w * psi - w * w * q * q
    if radicand < -1e-12 * max(1.0, 2 * w * psi):
        raise FormulaDomainError(f"2*w*psi - w^2 q^2 = {radicand:.6g} < 0")
    p = math.copysign(math.sqrt(max(radicand, 0.0)), math.cos(theta))
    return q, p
