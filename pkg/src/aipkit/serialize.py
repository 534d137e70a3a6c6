"""JSON documents: instance files, function files and reports.

Complex numbers are two-element arrays ``[re, im]`` (a bare number is
read as real); matrices are lists of rows.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

from .aip import AipData, validate
from .errors import ParseError, ValidationError
from .ratfun import RationalMatrixFunction


def complex_to_json(z):
    z = complex(z)
    return [_float(z.real), _float(z.imag)]


def _float(x):
    x = float(x)
    return x if math.isfinite(x) else None


def matrix_to_json(A):
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    return [[complex_to_json(z) for z in row] for row in A]


def _scalar(obj, where):
    if isinstance(obj, bool):
        raise ParseError("booleans are not numbers", where)
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, list) and len(obj) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
        return complex(obj[0], obj[1])
    raise ParseError("expected a number or [re, im]", where)


def parse_complex(obj, where="value"):
    return _scalar(obj, where)


def parse_matrix(obj, where, shape=None):
    if not isinstance(obj, list):
        raise ParseError("expected a list of rows", where)
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list):
            raise ParseError("expected a row list", f"{where}[{i}]")
        rows.append([_scalar(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    if len({len(r) for r in rows}) > 1:
        raise ParseError("rows have different lengths", where)
    if shape is not None and 0 in shape:
        if any(len(r) for r in rows) or (shape[0] == 0 and rows):
            raise ParseError(f"expected an empty {shape} matrix", where)
        return np.zeros(shape, dtype=complex)
    A = np.array(rows, dtype=complex).reshape(len(rows), len(rows[0]) if rows else 0)
    if shape is not None and A.shape != tuple(shape):
        raise ParseError(f"shape {A.shape} does not match declared {tuple(shape)}", where)
    return A


def _int(doc, key, where):
    v = doc.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise ParseError(f"'{key}' must be a nonnegative integer", f"{where}.{key}")
    return v


def _require(doc, key, where):
    if key not in doc:
        raise ParseError(f"missing key '{key}'", where)
    return doc[key]


def load_json(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", str(path)) from exc
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        loc = f"{path}:{getattr(exc, 'lineno', '?')}:{getattr(exc, 'colno', '?')}"
        raise ParseError(f"malformed JSON ({exc.__class__.__name__})", loc) from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", str(path))
    return doc, hashlib.sha256(raw).hexdigest()


# ---------------------------------------------------------------------------
# function files


def function_from_json(doc, where="function"):
    p, q, d = (_int(doc, k, where) for k in ("p", "q", "d"))
    shift = doc.get("shift", 0)
    if not isinstance(shift, int) or isinstance(shift, bool) or shift < 0:
        raise ParseError("'shift' must be a nonnegative integer", f"{where}.shift")
    T = parse_matrix(_require(doc, "T", where), f"{where}.T", (d, d))
    F = parse_matrix(_require(doc, "F", where), f"{where}.F", (d, q))
    G = parse_matrix(_require(doc, "G", where), f"{where}.G", (p, d))
    H = parse_matrix(_require(doc, "H", where), f"{where}.H", (p, q))
    return RationalMatrixFunction(T, F, G, H, shift)


def function_to_json(f):
    doc = {"p": f.p, "q": f.q, "d": f.d, "T": matrix_to_json(f.T) if f.d else [],
           "F": matrix_to_json(f.F) if f.d else [], "G": matrix_to_json(f.G) if f.d else [[] for _ in range(f.p)],
           "H": matrix_to_json(f.H)}
    if f.shift:
        doc["shift"] = f.shift
    return doc


def load_function(path):
    doc, digest = load_json(path)
    return function_from_json(doc, str(path)), digest


# ---------------------------------------------------------------------------
# instance files

OPTION_KEYS = ("grid", "tol", "seed")


def instance_from_json(doc, where="instance"):
    """Parse an instance document into ``(AipData, options)``."""
    n, p, q = (_int(doc, k, where) for k in ("n", "p", "q"))
    mats = {}
    for key, shape in (("M", (n, n)), ("N", (n, n)), ("C1", (p, n)), ("C2", (q, n)), ("P", (n, n))):
        mats[key] = parse_matrix(_require(doc, key, where), f"{where}.{key}", shape)
    anchor = doc.get("anchor")
    if anchor is not None:
        anchor = parse_complex(anchor, f"{where}.anchor")
    kt = doc.get("kappa_target")
    if kt is not None and (not isinstance(kt, int) or isinstance(kt, bool) or kt < 0):
        raise ParseError("'kappa_target' must be a nonnegative integer", f"{where}.kappa_target")
    options = {}
    if "epsilon" in doc:
        options["epsilon"] = parameter_from_json(doc["epsilon"], p, q, f"{where}.epsilon")
    for key in OPTION_KEYS:
        if key in doc:
            v = doc[key]
            ok = isinstance(v, (int, float)) and not isinstance(v, bool)
            if key in ("grid", "seed"):
                ok = ok and isinstance(v, int) and v >= 0
            if not ok:
                raise ParseError(f"bad value for '{key}'", f"{where}.{key}")
            options[key] = v
    if "nevanlinna_pick" in doc:
        npk = doc["nevanlinna_pick"]
        if not isinstance(npk, dict):
            raise ParseError("expected an object", f"{where}.nevanlinna_pick")
        nodes = [parse_complex(v, f"{where}.nevanlinna_pick.nodes[{i}]")
                 for i, v in enumerate(_require(npk, "nodes", f"{where}.nevanlinna_pick"))]
        values = [parse_complex(v, f"{where}.nevanlinna_pick.values[{i}]")
                  for i, v in enumerate(_require(npk, "values", f"{where}.nevanlinna_pick"))]
        options["nevanlinna_pick"] = (nodes, values)
    data = AipData(mats["M"], mats["N"], mats["C1"], mats["C2"], mats["P"], kt, anchor)
    return data, options


def parameter_from_json(obj, p, q, where):
    if isinstance(obj, dict) and "constant" in obj:
        E = parse_matrix(obj["constant"], f"{where}.constant", (p, q))
        return RationalMatrixFunction.constant(E)
    if isinstance(obj, dict) and "realization" in obj:
        f = function_from_json(obj["realization"], f"{where}.realization")
        if (f.p, f.q) != (p, q):
            raise ParseError(f"parameter shape {(f.p, f.q)} differs from {(p, q)}", where)
        return f
    try:
        c = _scalar(obj, where)
    except ParseError:
        raise ParseError("expected a constant, {'constant': ...} or {'realization': ...}", where)
    return RationalMatrixFunction.constant(c * np.eye(p, q))


def instance_to_json(data, options=None):
    doc = {"n": data.n, "p": data.p, "q": data.q}
    for key in ("M", "N", "C1", "C2", "P"):
        A = getattr(data, key)
        doc[key] = matrix_to_json(A) if A.size else [[] for _ in range(A.shape[0])]
    if data.anchor is not None:
        doc["anchor"] = complex_to_json(data.anchor)
    if data.kappa_target is not None:
        doc["kappa_target"] = data.kappa_target
    for key, v in (options or {}).items():
        if key == "epsilon":
            doc["epsilon"] = {"realization": function_to_json(v)}
        elif key == "nevanlinna_pick":
            doc["nevanlinna_pick"] = {"nodes": [complex_to_json(z) for z in v[0]],
                                      "values": [complex_to_json(w) for w in v[1]]}
        else:
            doc[key] = v
    return doc


def load_instance(path):
    doc, digest = load_json(path)
    data, options = instance_from_json(doc, str(path))
    return data, options, digest


def parse_instance(path):
    """Load and validate an instance file; returns ``(AipData, options)``.

    Raises
    ------
    ParseError
        On malformed files, with the location of the problem.
    ValidationError
        When the data fail a standing assumption; ``codes`` lists them.
    """
    data, options, _ = load_instance(path)
    res = validate(data)
    if not res.ok:
        msgs = "; ".join(d.message for d in res.diagnostics if d.severity == "error")
        raise ValidationError(f"{path}: {msgs}", res.codes)
    return data, options


# ---------------------------------------------------------------------------
# reports


def to_jsonable(obj):
    """Recursively convert numpy and complex values for ``json.dumps``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if obj.ndim == 0:
            return to_jsonable(obj.item())
        if np.iscomplexobj(obj):
            return to_jsonable([to_jsonable(v) for v in obj])
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_to_json(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_report(report):
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2, allow_nan=False) + "\n"
