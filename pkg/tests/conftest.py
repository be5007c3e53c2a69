import json
from pathlib import Path

import numpy as np
import pytest

from hamgeom import catalog
from hamgeom.expr import Expression
from hamgeom.poisson import BivectorField

DATA = Path(__file__).parent / "data"

# (text, coordinates, parameters, sampling box) covering every function in the grammar
EXTRA_EXPRESSIONS = [
    ("4*x*y + z^2", ["x", "y", "z"], {}, (-2, 2)),
    ("sin(x)*cos(y) - tan(z/3)", ["x", "y", "z"], {}, (-2, 2)),
    ("arctan(x*y) + exp(-z^2/2)", ["x", "y", "z"], {}, (-2, 2)),
    ("log(x) + sqrt(y) + x^y", ["x", "y"], {}, (0.5, 3)),
    ("(x - y)^3/(1 + x^2) - 2^x", ["x", "y"], {}, (-2, 2)),
    ("a*x^2.5 + b/y", ["x", "y"], {"a": 1.5, "b": -0.25}, (0.5, 3)),
    ("-x^2 - -y + pi*x*y", ["x", "y"], {}, (-2, 2)),
]

LV_PARAMS = {
    2: {"a12": 1.0, "eps1": -1.0, "eps2": 2.0},
    3: {"a12": 1.0, "a13": -2.0, "a23": 0.5, "q1": 1.0, "q2": 2.0, "q3": 1.0},
    4: {"a12": 1.0, "a13": -0.5, "a14": 2.0, "a23": 1.5, "a24": -1.0, "a34": 0.25, "q1": 1.0, "q2": 1.0, "q3": 2.0, "q4": 1.0},
}


def builtin_specimens():
    out = {name: catalog.build(name) for name in catalog.BUILDERS}
    for n in (3, 4):
        out[f"lotka_volterra_{n}"] = catalog.build("lotka_volterra", LV_PARAMS[n])
    return out


def expression_corpus():
    """Every expression the builtins use plus the extra list, with a sampling box."""
    corpus = []
    for name, spec in builtin_specimens().items():
        sys = spec.system
        exprs = list(sys.invariants().items()) + [(f"pi{ij}", e) for ij, e in sys.bivector.entries.items()]
        exprs += list(spec.extras.items())
        for label, e in exprs:
            corpus.append((f"{name}:{label}", e, dict(sys.parameters), sys.sample_box))
    for text, coords, params, box in EXTRA_EXPRESSIONS:
        e = Expression.parse(text, coords, params)
        corpus.append((text, e, params, [box] * len(coords)))
    return corpus


def helicity():
    coords = ["x", "y", "z"]
    return BivectorField(
        coords,
        {
            (0, 1): Expression.parse("y", coords),
            (0, 2): Expression.parse("-x", coords),
            (1, 2): Expression.parse("z", coords),
        },
    )


def helicity_document():
    return json.loads((DATA / "helicity.json").read_text())


def poly_text(rng, names, terms=4):
    """Random multilinear polynomial text with small integer coefficients."""
    out = []
    for _ in range(terms):
        powers = [int(k) for k in rng.integers(0, 2, len(names))]
        mono = "*".join(f"{n}^{k}" for n, k in zip(names, powers) if k) or "1"
        out.append(f"({rng.integers(-3, 4)})*{mono}")
    return " + ".join(out)


def random_points(rng, box, count):
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    return [lo + (hi - lo) * rng.random(len(box)) for _ in range(count)]


# -- acceptance reporting -------------------------------------------------------

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """``record(criterion, passed, detail)`` stores one line for the summary."""

    def _record(criterion: int, passed: bool, detail: str = "") -> None:
        prev = _ACCEPTANCE.get(criterion)
        ok = passed and (prev is None or prev[0])
        text = detail if prev is None else f"{prev[1]}; {detail}"
        _ACCEPTANCE[criterion] = (ok, text)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
