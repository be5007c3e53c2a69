"""Command-line interface.

Commands: ``simulate``, ``check``, ``portrait``, ``darboux`` and ``export``.
Exit codes: 0 success / check passed, 1 check failed cleanly, 2 usage
error, 3 numerical abort.

Systems are given either as ``builtin:<name>`` or as a path to a JSON
system-definition document::

    {
      "name": "helicity",
      "coordinates": ["x", "y", "z"],
      "parameters": {},
      "bivector": {"kind": "expressions", "entries": {"1,2": "y", "1,3": "-x", "2,3": "z"}},
      "hamiltonian": "x",
      "casimirs": {}, "integrals": {},
      "singular_locus": null,
      "sample_box": null,
      "canonical_separable": false
    }

``bivector.kind`` is ``canonical`` (with ``n``), ``expressions`` (1-based
``"i,j"`` keys with ``i < j``) or ``lie_poisson`` (with ``constants``, the
nested list ``c[k][i][j]``).
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

import numpy as np

from hamgeom import catalog
from hamgeom.expr import ExprError, Expression
from hamgeom.integrate import METHODS, IntegrationError, StepperConfig, StructureError, integrate
from hamgeom.poisson import BivectorField, StructureConstants, canonical_bivector, lie_poisson_from_constants
from hamgeom.symplin import NotSymplecticError, darboux_basis, darboux_residual, is_symplectic_form
from hamgeom.system import (
    DEFAULT_SEED,
    CheckError,
    CheckReport,
    PoissonSystem,
    check_casimir,
    involution_check,
    jacobi_check,
    schouten_check,
)

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_ABORT = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- system-definition documents ---------------------------------------------


def system_from_document(doc: dict, overrides: dict[str, float] | None = None) -> PoissonSystem:
    try:
        coords = [str(c) for c in doc["coordinates"]]
        params = {k: float(v) for k, v in (doc.get("parameters") or {}).items()}
        biv = doc["bivector"]
        kind = biv["kind"]
        hamiltonian_text = doc["hamiltonian"]
    except (KeyError, TypeError) as exc:
        raise UsageError(f"system document is missing field {exc}") from None
    for k, v in (overrides or {}).items():
        if k not in params:
            raise UsageError(f"unknown parameter {k!r}; document declares {sorted(params)}")
        params[k] = v
    names = list(params)

    def parse(text):
        return Expression.parse(text, coords, names)

    if kind == "canonical":
        n = int(biv["n"])
        if 2 * n != len(coords):
            raise UsageError(f"canonical bivector with n={n} needs {2 * n} coordinates")
        base = canonical_bivector(n, coords)
        pi = BivectorField(coords, base.entries, params, base.origin)
    elif kind == "expressions":
        entries = {}
        for key, text in biv.get("entries", {}).items():
            try:
                i, j = (int(s) for s in key.split(","))
            except ValueError:
                raise UsageError(f"bivector key {key!r} is not of the form 'i,j'") from None
            if not (1 <= i < j <= len(coords)):
                raise UsageError(f"bivector key {key!r} needs 1 <= i < j <= {len(coords)}")
            entries[(i - 1, j - 1)] = parse(text)
        pi = BivectorField(coords, entries, params)
    elif kind == "lie_poisson":
        lp = lie_poisson_from_constants(StructureConstants(biv["constants"]), coords)
        pi = BivectorField(coords, lp.entries, params, lp.origin)
    else:
        raise UsageError(f"unknown bivector kind {kind!r}")
    locus = doc.get("singular_locus")
    return PoissonSystem(
        pi,
        parse(hamiltonian_text),
        casimirs={k: parse(v) for k, v in (doc.get("casimirs") or {}).items()},
        integrals={k: parse(v) for k, v in (doc.get("integrals") or {}).items()},
        singular_locus=parse(locus) if locus else None,
        canonical_separable=bool(doc.get("canonical_separable", False)),
        sample_box=doc.get("sample_box"),
        name=str(doc.get("name", "system")),
    )


def document_from_system(system: PoissonSystem) -> dict:
    pi = system.bivector
    origin = pi.origin
    if origin[0] == "canonical":
        biv = {"kind": "canonical", "n": origin[1]}
    elif origin[0] == "lie_poisson":
        biv = {"kind": "lie_poisson", "constants": origin[1].c.tolist()}
    else:
        biv = {"kind": "expressions", "entries": {f"{i + 1},{j + 1}": e.render() for (i, j), e in pi.entries.items()}}
    return {
        "name": system.name,
        "coordinates": list(system.coordinates),
        "parameters": dict(system.parameters),
        "bivector": biv,
        "hamiltonian": system.hamiltonian.render(),
        "casimirs": {k: e.render() for k, e in system.casimirs.items()},
        "integrals": {k: e.render() for k, e in system.integrals.items()},
        "singular_locus": system.singular_locus.render() if system.singular_locus is not None else None,
        "sample_box": [list(b) for b in system.sample_box],
        "canonical_separable": system.canonical_separable,
    }


def load_system(ref: str, params: dict[str, float]) -> tuple[PoissonSystem, dict]:
    """Resolve ``builtin:<name>`` or a document path; returns the system and its document."""
    if ref.startswith("builtin:"):
        try:
            spec = catalog.build(ref[len("builtin:"):], params or None)
        except catalog.SpecimenError as exc:
            raise UsageError(str(exc)) from None
        return spec.system, document_from_system(spec.system)
    try:
        with open(ref) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read system document: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{ref} is not valid JSON: {exc}") from None
    system = system_from_document(doc, params)
    return system, document_from_system(system)


# -- argument helpers ----------------------------------------------------------


def _params(pairs: Sequence[str] | None) -> dict[str, float]:
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--param expects name=value, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--param {key}: {value!r} is not a number") from None
    return out


def _reals(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated reals, got {text!r}") from None


def _names(text: str | None) -> list[str] | None:
    if text is None:
        return None
    return [t.strip() for t in text.split(",") if t.strip()]


def _grid(text: str, coords: Sequence[str]) -> list[tuple[str, np.ndarray]]:
    axes = []
    for part in text.split(","):
        name, sep, spec = part.partition("=")
        pieces = spec.split(":")
        if not sep or len(pieces) != 3:
            raise UsageError(f"grid axis {part!r} must look like name=lo:hi:count")
        if name not in coords:
            raise UsageError(f"grid axis {name!r} is not a coordinate of {list(coords)}")
        try:
            lo, hi, count = float(pieces[0]), float(pieces[1]), int(pieces[2])
        except ValueError:
            raise UsageError(f"grid axis {part!r} has non-numeric bounds") from None
        if count < 1:
            raise UsageError(f"grid axis {name!r} needs count >= 1")
        axes.append((name, np.linspace(lo, hi, count) if count > 1 else np.array([lo])))
    if sorted(n for n, _ in axes) != sorted(coords):
        raise UsageError(f"grid must give exactly one axis per coordinate {list(coords)}")
    return axes


def _write_json(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# -- commands -----------------------------------------------------------------


def run_simulate(args) -> int:
    system, _ = load_system(args.system, _params(args.param))
    x0 = _reals(args.x0)
    if len(x0) != system.dimension:
        raise UsageError(f"--x0 has {len(x0)} components, {system.name} has {system.dimension}")
    traced = _names(args.trace)
    unknown = [t for t in traced or [] if t not in system.invariants()]
    if unknown:
        raise UsageError(f"unknown invariant(s) {unknown}; declared: {list(system.invariants())}")
    config = StepperConfig(args.method, args.h, args.tol, args.max_iter)
    try:
        traj = integrate(system, x0, config, args.steps, traced)
    except StructureError as exc:
        raise UsageError(str(exc)) from None
    except IntegrationError as exc:
        if exc.trajectory is not None:
            exc.trajectory.write_csv(args.out)
        print(f"numerical abort: {exc} (partial trajectory written to {args.out})", file=sys.stderr)
        return EXIT_ABORT
    traj.write_csv(args.out)
    return EXIT_OK


def _combine(name: str, reports: list[CheckReport], targets: list[str]) -> CheckReport:
    worst = max(reports, key=lambda r: r.max_residual)
    detail = f"targets: {', '.join(targets)}"
    return CheckReport(
        name,
        all(r.passed for r in reports),
        worst.tolerance,
        worst.samples,
        worst.seed,
        worst.max_residual,
        worst.worst_point,
        sum(r.skipped for r in reports),
        detail,
    )


def run_check(args) -> int:
    system, _ = load_system(args.system, _params(args.param))
    targets = _names(args.target)
    known = system.invariants()

    def resolve(names):
        out = []
        for n in names:
            if n in known:
                out.append(known[n])
            elif n in system.coordinates:
                out.append(Expression.coordinate(n, system.coordinates))
            else:
                raise UsageError(f"unknown target {n!r}; declared: {list(known)}")
        return out

    opts = dict(samples=args.samples, seed=args.seed, tol=args.tol)
    try:
        if args.kind == "jacobi":
            report = jacobi_check(system, **opts)
        elif args.kind == "schouten":
            report = schouten_check(system)
        elif args.kind == "casimir":
            targets = targets or list(system.casimirs)
            if not targets:
                raise UsageError("no --target given and the system declares no Casimirs")
            report = _combine("casimir", [check_casimir(system, e, **opts) for e in resolve(targets)], targets)
        else:
            targets = targets or list(known)
            report = involution_check(system, resolve(targets), **opts)
            report.detail = f"targets: {', '.join(targets)}"
    except CheckError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    doc = {"system": system.name, **report.as_dict()}
    _write_json(doc, args.out)
    if not report.passed:
        where = f" at {report.worst_point}" if report.worst_point is not None else ""
        print(f"{args.kind} check failed: residual {report.max_residual:.6g}{where} {report.detail}".rstrip(), file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAILED


def _portrait_worker(job):
    doc, index, x0, method, h, tol, max_iter, steps, path = job
    system = system_from_document(doc)
    config = StepperConfig(method, h, tol, max_iter)
    try:
        traj = integrate(system, x0, config, steps)
        status = "ok"
    except IntegrationError as exc:
        traj = exc.trajectory
        status = f"aborted at step {exc.step}"
    if traj is not None:
        traj.write_csv(path)
    return index, status


def run_portrait(args) -> int:
    system, doc = load_system(args.system, _params(args.param))
    if system.dimension != 2:
        raise UsageError(f"portrait needs a 2-dimensional chart, {system.name} has {system.dimension}")
    axes = _grid(args.grid, system.coordinates)
    if args.method in ("symplectic_euler", "verlet") and not system.canonical_separable:
        raise UsageError("method requires canonical separable structure")
    StepperConfig(args.method, args.h, args.tol, args.max_iter)
    os.makedirs(args.out, exist_ok=True)
    seeds = []
    for values in itertools.product(*(v for _, v in axes)):
        point = dict(zip((n for n, _ in axes), values))
        seeds.append([float(point[c]) for c in system.coordinates])
    jobs = [
        (doc, k, x0, args.method, args.h, args.tol, args.max_iter, args.steps, os.path.join(args.out, f"traj_{k:04d}.csv"))
        for k, x0 in enumerate(seeds)
    ]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = dict(pool.map(_portrait_worker, jobs))
    else:
        results = dict(map(_portrait_worker, jobs))
    # the index is written last, after every trajectory file exists
    with open(os.path.join(args.out, "index.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "file", *system.coordinates, "status"])
        for k, x0 in enumerate(seeds):
            w.writerow([k, f"traj_{k:04d}.csv", *(format(v, ".17g") for v in x0), results[k]])
    aborted = [k for k, s in results.items() if s != "ok"]
    if aborted:
        print(f"numerical abort in {len(aborted)} trajectories: {aborted}", file=sys.stderr)
        return EXIT_ABORT
    return EXIT_OK


def run_darboux(args) -> int:
    try:
        omega = np.atleast_2d(np.loadtxt(args.form, dtype=float))
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read matrix file: {exc}") from None
    if omega.shape[0] != omega.shape[1]:
        print(f"not symplectic: matrix is {omega.shape[0]}x{omega.shape[1]}, not square", file=sys.stderr)
        return EXIT_FAILED
    if not is_symplectic_form(omega, args.tol):
        print("not symplectic: matrix is not skew-symmetric or is degenerate", file=sys.stderr)
        return EXIT_FAILED
    try:
        basis = darboux_basis(omega, args.tol)
    except NotSymplecticError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAILED
    residual = darboux_residual(omega, basis)
    np.savetxt(args.out, basis, fmt="%.17g", header=f"residual {residual:.17g}")
    print(f"residual {residual:.17g}")
    return EXIT_OK


def run_export(args) -> int:
    _, doc = load_system(args.system, _params(args.param))
    _write_json(doc, args.out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hamgeom", description="Poisson geometry and Hamiltonian integration tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    def system_args(p):
        p.add_argument("--system", required=True, help="builtin:<name> or path to a JSON system document")
        p.add_argument("--param", action="append", metavar="NAME=VALUE", help="parameter value (repeatable)")

    def stepper_args(p):
        p.add_argument("--method", choices=METHODS, required=True)
        p.add_argument("--h", type=float, required=True, help="step size")
        p.add_argument("--steps", type=int, required=True)
        p.add_argument("--tol", type=float, default=1e-12, help="implicit solve tolerance")
        p.add_argument("--max-iter", type=int, default=100, help="implicit solve iteration budget")

    p = sub.add_parser("simulate", help="integrate one trajectory to CSV")
    system_args(p)
    p.add_argument("--x0", required=True, help="initial state, comma separated (use --x0=-1,0 for a leading minus)")
    stepper_args(p)
    p.add_argument("--trace", help="invariants to trace, comma separated (default: all declared)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=run_simulate)

    p = sub.add_parser("check", help="run a structure check and write a JSON report")
    system_args(p)
    p.add_argument("--kind", choices=("jacobi", "schouten", "casimir", "involution"), required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--target", help="function names, comma separated")
    p.add_argument("--out", default="-", help="report path (default: stdout)")
    p.set_defaults(func=run_check)

    p = sub.add_parser("portrait", help="integrate a grid of seeds on a 2-dimensional chart")
    system_args(p)
    p.add_argument("--grid", required=True, help="axis=lo:hi:count for each coordinate, comma separated")
    stepper_args(p)
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=run_portrait)

    p = sub.add_parser("darboux", help="compute a Darboux basis for a constant symplectic form")
    p.add_argument("--form", required=True, help="whitespace-separated matrix file")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=run_darboux)

    p = sub.add_parser("export", help="write a system as a JSON definition document")
    system_args(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=run_export)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ExprError, ValueError, KeyError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
