"""Problem files and JSON-safe serialization."""
import json
import math
import os
from importlib import resources

import numpy as np

from varalg.errors import VarAlgError
from varalg.nonlin import catalog_make
from varalg.problems import (
    build_fourth_order,
    build_generic,
    build_lattice,
    build_tridiagonal,
    make_net,
    rectangle_net,
)


class ProblemFileError(VarAlgError, ValueError):
    """Unreadable or malformed problem file."""


def bundled_problems():
    """Names of the problem files shipped with the package."""
    root = resources.files("varalg") / "data"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _resolve(path):
    if os.path.exists(path):
        return path
    name = os.path.basename(path)
    stem = name[:-5] if name.endswith(".json") else name
    if stem in bundled_problems():
        return str(resources.files("varalg") / "data" / (stem + ".json"))
    raise ProblemFileError("problem file not found: %s" % path)


def load_problem(path):
    """Read a problem file (a path, or the name of a bundled file).

    Returns (problem, meta) where meta describes the input for reports.
    """
    real = _resolve(path)
    try:
        with open(real, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemFileError("cannot read %s: %s" % (path, exc)) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError("%s: line %d column %d: %s" % (path, exc.lineno, exc.colno, exc.msg)) from None
    problem, meta = problem_from_dict(doc)
    meta["source"] = os.path.basename(real)
    return problem, meta


def _need(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise ProblemFileError("%s: missing key %r" % (where, key))
    return d[key]


def _build_nonlinearity(spec, n):
    kind = _need(spec, "kind", "nonlinearity")
    params = dict(spec.get("params", {}))
    for key in ("per_component", "expr"):
        if key in spec:
            params[key] = spec[key]
    if "per_component" not in params:
        params.setdefault("n", n)
    return catalog_make(kind, params)


def problem_from_dict(doc):
    if not isinstance(doc, dict):
        raise ProblemFileError("problem file must hold a JSON object")
    mspec = _need(doc, "matrix", "problem")
    nspec = _need(doc, "nonlinearity", "problem")
    kind = _need(mspec, "kind", "matrix")
    try:
        if kind == "tridiagonal":
            if "text" in mspec:
                parts = str(mspec["text"]).split()
                if len(parts) != 3:
                    raise ProblemFileError("tridiagonal text form is 'n a b', got %r" % mspec["text"])
                n, a, b = int(parts[0]), float(parts[1]), float(parts[2])
            else:
                n, a, b = int(_need(mspec, "n", "matrix")), float(_need(mspec, "a", "matrix")), float(
                    _need(mspec, "b", "matrix"))
            problem = build_tridiagonal(n, a, b, _build_nonlinearity(nspec, n))
        elif kind == "fourth_order":
            n = int(_need(mspec, "n", "matrix"))
            problem = build_fourth_order(n, _build_nonlinearity(nspec, n))
        elif kind == "lattice":
            if "rectangle" in mspec:
                net = rectangle_net(*mspec["rectangle"])
            else:
                net = make_net(_need(mspec, "points", "matrix"))
            problem = build_lattice(net, _build_nonlinearity(nspec, net.n))
        elif kind == "dense":
            entries = np.asarray(_need(mspec, "entries", "matrix"), dtype=np.float64)
            if entries.ndim != 2:
                raise ProblemFileError("dense matrix entries must be an array of rows")
            problem = build_generic(entries, _build_nonlinearity(nspec, entries.shape[0]))
        else:
            raise ProblemFileError("unknown matrix kind %r" % kind)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, VarAlgError):
            raise
        raise ProblemFileError("bad problem definition: %s" % exc) from None
    f = problem.nonlinearity
    meta = {
        "name": str(doc.get("name", "")),
        "n": problem.n,
        "matrix_kind": kind,
        "nonlinearity": f.name,
        "components": [c.source or c.label for c in f.components],
    }
    return problem, meta


# ---------------------------------------------------------------- JSON

def jsonable(obj):
    """Plain-JSON copy of obj; non-finite floats become "inf", "-inf", "nan"."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError("cannot serialize %r" % type(obj).__name__)


def dumps(obj):
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"
