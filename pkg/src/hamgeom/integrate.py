"""Fixed-step time integration of ``ẋ = X_H(x)`` with invariant tracing."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from hamgeom.expr import DomainError
from hamgeom.system import PoissonSystem

METHODS = ("rk4", "symplectic_euler", "verlet", "implicit_midpoint")
POLISH_ITERATIONS = 3


class IntegrationError(RuntimeError):
    """A step failed.  ``step`` is the index of the failing step and
    ``trajectory`` holds everything computed before it."""

    def __init__(self, message: str, step: int | None = None, trajectory: "Trajectory | None" = None):
        super().__init__(message)
        self.step = step
        self.trajectory = trajectory


class ConvergenceError(IntegrationError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class StructureError(ValueError):
    pass


@dataclass(frozen=True)
class StepperConfig:
    method: str = "implicit_midpoint"
    h: float = 0.01
    tol: float = 1e-12
    max_iter: int = 100

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if not self.h > 0:
            raise ValueError("step size must be positive")
        if not self.tol > 0:
            raise ValueError("solver tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class Trajectory:
    coordinates: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray
    invariant_traces: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def write_csv(self, path) -> None:
        """Header ``t,<coords>,<invariants>``; values in 17-significant-digit form."""
        names = list(self.invariant_traces)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", *self.coordinates, *names])
            for k in range(len(self.times)):
                row = [self.times[k], *self.states[k], *(self.invariant_traces[n][k] for n in names)]
                w.writerow([format(float(v), ".17g") for v in row])


@dataclass(frozen=True)
class Drift:
    max_abs_drift: float
    final_drift: float
    series: np.ndarray


# -- steppers ----------------------------------------------------------------


def _require_separable(sys: PoissonSystem) -> int:
    if not sys.canonical_separable:
        raise StructureError("method requires canonical separable structure")
    return sys.dimension // 2


def _add(x, d):
    return [a + b for a, b in zip(x, d)]


# Each scheme is written as an increment ``x_{n+1} - x_n``; the public
# ``*_step`` functions add it once, ``integrate`` accumulates it with
# compensated summation.


def rk4_increment(sys: PoissonSystem, x: Sequence[float], h: float) -> list[float]:
    f = sys.vector_field
    k1 = f(x)
    k2 = f([a + 0.5 * h * b for a, b in zip(x, k1)])
    k3 = f([a + 0.5 * h * b for a, b in zip(x, k2)])
    k4 = f([a + h * b for a, b in zip(x, k3)])
    return [h / 6 * (b1 + 2 * b2 + 2 * b3 + b4) for b1, b2, b3, b4 in zip(k1, k2, k3, k4)]


def symplectic_euler_increment(sys: PoissonSystem, x: Sequence[float], h: float) -> list[float]:
    """Kick with ``−∂V/∂q`` then drift with ``∂T/∂p`` at the updated momenta.

    For separable ``H = T(p) + V(q)`` the partials of H are the partials of
    T and V, so they are read off the Hamiltonian's gradient.
    """
    n = _require_separable(sys)
    g = sys.energy_gradient(x)
    dp = [-h * gi for gi in g[:n]]
    g = sys.energy_gradient(list(x[:n]) + _add(x[n:], dp))
    dq = [h * gi for gi in g[n:]]
    return dq + dp


def verlet_increment(sys: PoissonSystem, x: Sequence[float], h: float) -> list[float]:
    n = _require_separable(sys)
    q, p = list(x[:n]), list(x[n:])
    g = sys.energy_gradient(x)
    dp = [-0.5 * h * gi for gi in g[:n]]
    p_half = _add(p, dp)
    g = sys.energy_gradient(q + p_half)
    dq = [h * gi for gi in g[n:]]
    g = sys.energy_gradient(_add(q, dq) + p_half)
    dp = [a - 0.5 * h * gi for a, gi in zip(dp, g[:n])]
    return dq + dp


def implicit_midpoint_increment(
    sys: PoissonSystem, x: Sequence[float], h: float, tol: float = 1e-12, max_iter: int = 100
) -> list[float]:
    """Solve ``d = h X_H(x + d/2)`` for the increment ``d``.

    Fixed-point iteration first; once half the iteration budget has been
    spent without contraction, switch to Newton with the exact Jacobian.
    Converged when the max-norm residual is at most ``tol · (1 + ‖x‖_∞)``.
    """
    x = [float(v) for v in x]
    f = sys.vector_field
    scale = tol * (1.0 + max(abs(v) for v in x))

    def residual(d):
        fm = f([a + 0.5 * b for a, b in zip(x, d)])
        r = [di - h * fi for di, fi in zip(d, fm)]
        return r, max(abs(v) for v in r)

    d = [h * v for v in f(x)]
    r, res = residual(d)
    stalled = 0
    it = 0
    while res > scale and it < max_iter:
        it += 1
        if stalled < max_iter // 2:
            d_new = [di - ri for di, ri in zip(d, r)]
            r_new, res_new = residual(d_new)
            if res_new >= res:
                stalled += 1
            d, r, res = d_new, r_new, res_new
        else:
            mid = [a + 0.5 * b for a, b in zip(x, d)]
            jac = np.eye(len(x)) - 0.5 * h * sys.jacobian(mid)
            delta = np.linalg.solve(jac, np.array(r))
            d = [di - si for di, si in zip(d, delta.tolist())]
            r, res = residual(d)
    if res > scale:
        raise ConvergenceError(f"implicit midpoint did not converge: residual {res:.3g}", res)
    # polish: a few more contracting iterations push the residual down to
    # round-off, so quadratic invariants do not pick up a per-step bias
    for _ in range(POLISH_ITERATIONS):
        if res == 0.0:
            break
        d_new = [di - ri for di, ri in zip(d, r)]
        r_new, res_new = residual(d_new)
        if res_new >= res:
            break
        d, r, res = d_new, r_new, res_new
    return d


def rk4_step(sys: PoissonSystem, x: Sequence[float], h: float) -> list[float]:
    return _add(x, rk4_increment(sys, x, h))


def symplectic_euler_step(sys: PoissonSystem, x: Sequence[float], h: float) -> list[float]:
    return _add(x, symplectic_euler_increment(sys, x, h))


def verlet_step(sys: PoissonSystem, x: Sequence[float], h: float) -> list[float]:
    return _add(x, verlet_increment(sys, x, h))


def implicit_midpoint_step(
    sys: PoissonSystem, x: Sequence[float], h: float, tol: float = 1e-12, max_iter: int = 100
) -> list[float]:
    return _add(x, implicit_midpoint_increment(sys, x, h, tol, max_iter))


def make_increment(config: StepperConfig) -> Callable[[PoissonSystem, Sequence[float]], list[float]]:
    h = config.h
    if config.method == "rk4":
        return lambda sys, x: rk4_increment(sys, x, h)
    if config.method == "symplectic_euler":
        return lambda sys, x: symplectic_euler_increment(sys, x, h)
    if config.method == "verlet":
        return lambda sys, x: verlet_increment(sys, x, h)
    return lambda sys, x: implicit_midpoint_increment(sys, x, h, config.tol, config.max_iter)


def integrate(
    sys: PoissonSystem,
    x0: Sequence[float],
    config: StepperConfig,
    n_steps: int,
    traced: Sequence[str] | None = None,
) -> Trajectory:
    """Apply the configured stepper ``n_steps`` times from ``x0``.

    Increments are accumulated with compensated (Kahan) summation so that
    round-off in the state does not build up over long runs.  ``traced``
    defaults to every invariant the system declares (``H`` included).  A
    state that leaves the admissible set or the domain of the Hamiltonian
    aborts with :class:`IntegrationError` carrying the partial trajectory.
    """
    if len(x0) != sys.dimension:
        raise ValueError(f"initial state has {len(x0)} components, chart has {sys.dimension}")
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    traced = list(sys.invariants()) if traced is None else list(traced)
    for name in traced:
        if name not in sys.invariants():
            raise KeyError(f"unknown invariant {name!r}")
    if config.method in ("symplectic_euler", "verlet"):
        _require_separable(sys)
    x = [float(v) for v in x0]
    if not sys.admissible(x):
        raise IntegrationError("initial state lies on the singular locus", step=0)
    increment = make_increment(config)
    comp = [0.0] * len(x)
    states = [x]
    for k in range(1, n_steps + 1):
        try:
            d = increment(sys, x)
            new = []
            for i, (xi, di) in enumerate(zip(x, d)):
                y = di - comp[i]
                t = xi + y
                comp[i] = (t - xi) - y
                new.append(t)
            x = new
            if not all(math.isfinite(v) for v in x):
                raise DomainError("non-finite state", "state")
            if not sys.admissible(x):
                raise DomainError("state reached the singular locus", "state")
            sys.energy(x)  # rejects states outside the Hamiltonian's domain
        except (DomainError, ConvergenceError) as exc:
            partial = _build(sys, states, config.h, traced)
            raise IntegrationError(f"step {k}: {exc}", step=k, trajectory=partial) from exc
        states.append(x)
    return _build(sys, states, config.h, traced)


def _build(sys: PoissonSystem, states: list, h: float, traced: Sequence[str]) -> Trajectory:
    arr = np.array(states, dtype=float).reshape(len(states), sys.dimension)
    times = h * np.arange(len(states), dtype=float)
    traces = {}
    for name in traced:
        vals = []
        for s in states:
            try:
                vals.append(sys.invariant_value(name, s))
            except DomainError:
                vals.append(math.nan)
        traces[name] = np.array(vals)
    return Trajectory(tuple(sys.coordinates), times, arr, traces)


def invariant_drift(traj: Trajectory, name: str) -> Drift:
    if name not in traj.invariant_traces:
        raise KeyError(f"invariant {name!r} was not traced; traced: {sorted(traj.invariant_traces)}")
    series = traj.invariant_traces[name] - traj.invariant_traces[name][0]
    return Drift(float(np.max(np.abs(series))), float(series[-1]), series)
