"""JSON instance files: schemas, validation and conversion to domain objects.

Every file is ``{"format_version": "1", "kind": ..., "payload": {...}}``.
Extended integers are JSON integers or the strings ``"inf"`` / ``"-inf"``.
Validation collects every structural and dimensional problem before
reporting, each tagged with a JSON pointer to the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import jsonschema
import numpy as np

from .core import BoundsBox, IntMatrix, ext_int
from .graver import Bimatrix
from .objectives import Linear, PiecewiseLinearConvex, PowerAbsDev, SeparableObjective

FORMAT_VERSION = "1"

KINDS = ("matrix-graver", "nfold-graver", "nfold-solve", "table", "entry-set",
         "transshipment", "transportation", "complexity")

_INT = {"type": "integer"}
_EXT = {"anyOf": [{"type": "integer"}, {"enum": ["inf", "-inf"]}]}
_VEC = {"type": "array", "items": _INT}
_EXTVEC = {"type": "array", "items": _EXT}
_MATRIX = {"type": "array", "items": _VEC}
_COUNT = {"type": "integer", "minimum": 1}
_NESTED_INT = {"anyOf": [{"type": "integer"}, {"type": "array", "items": {"$ref": "#/$defs/nested"}}]}

_TERM = {
    "anyOf": [
        {"type": "integer"},
        {"type": "object", "additionalProperties": False, "required": ["type", "w"],
         "properties": {"type": {"const": "linear"}, "w": _INT}},
        {"type": "object", "additionalProperties": False, "required": ["type", "beta"],
         "properties": {"type": {"const": "power"}, "alpha": {"type": "integer", "minimum": 0},
                        "beta": {"type": "integer", "minimum": 1}, "center": _INT}},
        {"type": "object", "additionalProperties": False, "required": ["type", "pieces"],
         "properties": {"type": {"const": "piecewise"},
                        "pieces": {"type": "array", "minItems": 1,
                                   "items": {"type": "array", "items": _INT,
                                             "minItems": 2, "maxItems": 2}}}},
    ]
}
_TERMS = {"type": "array", "items": _TERM}

_BIMATRIX = {"type": "object", "additionalProperties": False, "required": ["t"],
             "properties": {"top": _MATRIX, "bottom": _MATRIX, "t": _COUNT}}

_GRAPH = {"type": "object", "additionalProperties": False, "required": ["vertices", "edges"],
          "properties": {"vertices": _COUNT,
                         "edges": {"type": "array", "items": {"type": "array", "items": _INT,
                                                              "minItems": 2, "maxItems": 2}},
                         "directed": {"type": "boolean"}}}

_TABLE_PROPS = {"dims": {"type": "array", "items": _COUNT, "minItems": 2}, "n": _COUNT,
                "margins": {"type": "array", "items": {"$ref": "#/$defs/nested"}},
                "cost": {"$ref": "#/$defs/nested"}}


def _obj(required, **props):
    return {"type": "object", "additionalProperties": False, "required": list(required),
            "properties": props}


PAYLOAD_SCHEMAS = {
    "matrix-graver": _obj(["matrix"], matrix=_MATRIX, ncols=_COUNT),
    "nfold-graver": _obj(["bimatrix", "n"], bimatrix=_BIMATRIX, n=_COUNT),
    "complexity": {"type": "object", "additionalProperties": False,
                   "properties": {"bimatrix": _BIMATRIX, "graph": _GRAPH},
                   "oneOf": [{"required": ["bimatrix"]}, {"required": ["graph"]}]},
    "nfold-solve": _obj(
        ["bimatrix", "n", "rhs"], bimatrix=_BIMATRIX, n=_COUNT, lower=_EXTVEC, upper=_EXTVEC,
        rhs=_VEC, objective=_TERMS,
        distance=_obj(["p", "target"], p={"anyOf": [_COUNT, {"const": "inf"}]}, target=_VEC,
                      method={"enum": ["power", "bisection"]}),
        maximize=_obj(["W", "f"], W=_MATRIX, f=_TERMS),
        weighted=_obj(["W", "f"], W=_BIMATRIX, f=_TERMS, hat_lower=_EXTVEC, hat_upper=_EXTVEC)),
    "table": _obj(["dims", "n", "margins"], **_TABLE_PROPS),
    "entry-set": _obj(["dims", "n", "margins", "entry"], entry=_VEC, **_TABLE_PROPS),
    "transshipment": _obj(
        ["vertices", "edges", "demands", "capacities"], vertices=_COUNT,
        edges=_GRAPH["properties"]["edges"], demands=_MATRIX, capacities=_EXTVEC,
        edge_costs=_TERMS, commodity_costs={"type": "array", "items": _TERMS},
        encoding={"enum": ["slack", "weighted"]}),
    "transportation": _obj(
        ["volumes", "supplies", "consumptions", "capacities"], volumes=_VEC, supplies=_MATRIX,
        consumptions=_MATRIX, capacities={"type": "array", "items": _EXTVEC},
        edge_costs={"type": "array", "items": _TERMS},
        commodity_costs={"type": "array", "items": {"type": "array", "items": _TERMS}}),
}

_DEFS = {"nested": _NESTED_INT}

ENVELOPE_SCHEMA = _obj(["format_version", "kind", "payload"],
                       format_version={"const": FORMAT_VERSION}, kind={"enum": list(KINDS)},
                       payload={"type": "object"})


class ValidationFailed(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass
class InstanceFile:
    kind: str
    payload: dict


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path)


def _schema_errors(schema: dict, doc: Any, prefix: tuple = ()) -> list[str]:
    schema = dict(schema, **{"$defs": _DEFS})
    validator = jsonschema.Draft202012Validator(schema)
    errs = sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    return [f"{_pointer(prefix + tuple(e.absolute_path))}: {e.message}" for e in errs]


def parse_instance(text: str) -> InstanceFile:
    """Parse and fully validate an instance file; raises ``ValidationFailed``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationFailed([f"/: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"])
    errors = _schema_errors(ENVELOPE_SCHEMA, doc)
    if errors:
        raise ValidationFailed(errors)
    kind, payload = doc["kind"], doc["payload"]
    errors = _schema_errors(PAYLOAD_SCHEMAS[kind], payload, ("payload",))
    if not errors:
        errors = _CHECKS[kind](payload)
    if errors:
        raise ValidationFailed(errors)
    return InstanceFile(kind, payload)


def validate(text: str) -> list[str]:
    try:
        parse_instance(text)
    except ValidationFailed as exc:
        return exc.errors
    return []


# ---------------------------------------------------------------- conversion


def term_from_json(spec):
    if isinstance(spec, int):
        return Linear(spec)
    kind = spec["type"]
    if kind == "linear":
        return Linear(spec["w"])
    if kind == "power":
        return PowerAbsDev(spec.get("alpha", 1), spec["beta"], spec.get("center", 0))
    return PiecewiseLinearConvex(tuple(tuple(p) for p in spec["pieces"]))


def objective_from_json(specs) -> SeparableObjective:
    return SeparableObjective(tuple(term_from_json(s) for s in specs))


def matrix_from_json(rows, ncols: int | None = None) -> IntMatrix:
    return IntMatrix.from_rows(rows, ncols)


def bimatrix_from_json(spec) -> Bimatrix:
    t = spec["t"]
    return Bimatrix(IntMatrix.from_rows(spec.get("top", []), t),
                    IntMatrix.from_rows(spec.get("bottom", []), t))


def bounds_from_json(payload, n: int, lo_key="lower", hi_key="upper",
                     default_lower=0) -> BoundsBox:
    lower = payload.get(lo_key, [default_lower] * n)
    upper = payload.get(hi_key, ["inf"] * n)
    return BoundsBox.of(lower, upper)


# ---------------------------------------------------------------- dimensional checks


def _ragged(rows, width: int | None, where: str) -> list[str]:
    errs = []
    if width is None and rows:
        width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            errs.append(f"{where}/{i}: row has {len(row)} entries, expected {width}")
    return errs


def _check_matrix(p) -> list[str]:
    rows = p["matrix"]
    errs = _ragged(rows, p.get("ncols"), "/payload/matrix")
    if not rows and "ncols" not in p:
        errs.append("/payload/ncols: required when the matrix has no rows")
    if rows and not rows[0] and "ncols" not in p:
        errs.append("/payload/matrix/0: rows must not be empty")
    return errs


def _check_bimatrix(spec, where: str) -> list[str]:
    t = spec["t"]
    return (_ragged(spec.get("top", []), t, f"{where}/top")
            + _ragged(spec.get("bottom", []), t, f"{where}/bottom"))


def _check_nfold_graver(p) -> list[str]:
    return _check_bimatrix(p["bimatrix"], "/payload/bimatrix")


def _check_complexity(p) -> list[str]:
    if "bimatrix" in p:
        return _check_bimatrix(p["bimatrix"], "/payload/bimatrix")
    g = p["graph"]
    return [f"/payload/graph/edges/{i}: vertex out of range"
            for i, (a, b) in enumerate(g["edges"])
            if not (0 <= a < g["vertices"] and 0 <= b < g["vertices"])]


def _bound_pairs(lower, upper, where_lo: str, where_hi: str) -> list[str]:
    errs = []
    for i, v in enumerate(lower):
        if v == "inf":
            errs.append(f"{where_lo}/{i}: lower bound cannot be +inf")
    for i, v in enumerate(upper):
        if v == "-inf":
            errs.append(f"{where_hi}/{i}: upper bound cannot be -inf")
    return errs


def _check_solve(p) -> list[str]:
    errs = _check_bimatrix(p["bimatrix"], "/payload/bimatrix")
    spec, n = p["bimatrix"], p["n"]
    t, r, s = spec["t"], len(spec.get("top", [])), len(spec.get("bottom", []))
    nt = n * t
    for key in ("lower", "upper", "objective"):
        if key in p and len(p[key]) != nt:
            errs.append(f"/payload/{key}: expected {nt} entries, got {len(p[key])}")
    errs += _bound_pairs(p.get("lower", []), p.get("upper", []), "/payload/lower", "/payload/upper")
    if len(p["rhs"]) != r + n * s:
        errs.append(f"/payload/rhs: expected {r + n * s} entries, got {len(p['rhs'])}")
    modes = [k for k in ("distance", "maximize", "weighted") if k in p]
    if len(modes) > 1:
        errs.append(f"/payload: at most one of distance, maximize, weighted (got {', '.join(modes)})")
    if "distance" in p and len(p["distance"]["target"]) != nt:
        errs.append(f"/payload/distance/target: expected {nt} entries")
    if "maximize" in p:
        W = p["maximize"]["W"]
        errs += _ragged(W, nt, "/payload/maximize/W")
        if len(p["maximize"]["f"]) != len(W):
            errs.append("/payload/maximize/f: need one term per row of W")
    if "weighted" in p:
        w = p["weighted"]
        errs += _check_bimatrix(w["W"], "/payload/weighted/W")
        if w["W"]["t"] != t:
            errs.append("/payload/weighted/W/t: must equal the bimatrix width")
        d = len(w["W"].get("top", [])) + n * len(w["W"].get("bottom", []))
        for key in ("f", "hat_lower", "hat_upper"):
            if key in w and len(w[key]) != d:
                errs.append(f"/payload/weighted/{key}: expected {d} entries, got {len(w[key])}")
        errs += _bound_pairs(w.get("hat_lower", []), w.get("hat_upper", []),
                             "/payload/weighted/hat_lower", "/payload/weighted/hat_upper")
    return errs


def _shape_of(nested) -> tuple | None:
    try:
        arr = np.array(nested, dtype=object)
    except ValueError:
        return None
    if arr.size and any(isinstance(v, list) for v in arr.flat):
        return None
    return arr.shape


def _check_table(p) -> list[str]:
    errs = []
    dims = tuple(p["dims"])
    shape = dims + (p["n"],)
    if len(p["margins"]) != len(shape):
        return [f"/payload/margins: expected {len(shape)} margin arrays, got {len(p['margins'])}"]
    for k, margin in enumerate(p["margins"]):
        want = shape[:k] + shape[k + 1:]
        got = _shape_of(margin)
        if got != want:
            errs.append(f"/payload/margins/{k}: shape {got}, expected {want}")
        elif np.array(margin, dtype=object).size and min(np.array(margin, dtype=object).flat) < 0:
            errs.append(f"/payload/margins/{k}: entries must be nonnegative")
    if "cost" in p and _shape_of(p["cost"]) != shape:
        errs.append(f"/payload/cost: shape {_shape_of(p['cost'])}, expected {shape}")
    if "entry" in p:
        e = p["entry"]
        if len(e) != len(shape) or any(not 0 <= v < m for v, m in zip(e, shape)):
            errs.append(f"/payload/entry: {e} is not a cell of a table of shape {shape}")
    return errs


def _check_transshipment(p) -> list[str]:
    errs = []
    s, edges = p["vertices"], p["edges"]
    if not edges:
        errs.append("/payload/edges: digraph needs at least one edge")
    for i, (a, b) in enumerate(edges):
        if not (0 <= a < s and 0 <= b < s) or a == b:
            errs.append(f"/payload/edges/{i}: bad edge {[a, b]}")
    if not p["demands"]:
        errs.append("/payload/demands: need at least one commodity")
    errs += _ragged(p["demands"], s, "/payload/demands")
    if len(p["capacities"]) != len(edges):
        errs.append(f"/payload/capacities: expected {len(edges)} entries")
    for i, c in enumerate(p["capacities"]):
        if c == "-inf" or (isinstance(c, int) and c < 0):
            errs.append(f"/payload/capacities/{i}: capacity must be nonnegative")
    if p.get("encoding", "slack") == "slack" and "inf" in p["capacities"]:
        errs.append("/payload/capacities: slack encoding needs finite capacities")
    if "edge_costs" in p and len(p["edge_costs"]) != len(edges):
        errs.append(f"/payload/edge_costs: expected {len(edges)} entries")
    if "commodity_costs" in p:
        if len(p["commodity_costs"]) != len(p["demands"]):
            errs.append("/payload/commodity_costs: need one row per commodity")
        errs += _ragged(p["commodity_costs"], len(edges), "/payload/commodity_costs")
    return errs


def _check_transportation(p) -> list[str]:
    errs = []
    l, m, n = len(p["volumes"]), len(p["supplies"]), len(p["consumptions"])
    if not (l and m and n):
        errs.append("/payload: need at least one commodity, supplier and consumer")
    for key in ("volumes",):
        errs += [f"/payload/{key}/{i}: must be nonnegative" for i, v in enumerate(p[key]) if v < 0]
    for key in ("supplies", "consumptions"):
        errs += _ragged(p[key], l, f"/payload/{key}")
        errs += [f"/payload/{key}/{i}: entries must be nonnegative"
                 for i, row in enumerate(p[key]) if any(v < 0 for v in row)]
    if len(p["capacities"]) != m:
        errs.append(f"/payload/capacities: expected {m} rows")
    errs += _ragged(p["capacities"], n, "/payload/capacities")
    for i, row in enumerate(p["capacities"]):
        for j, c in enumerate(row):
            if c == "-inf" or (isinstance(c, int) and c < 0):
                errs.append(f"/payload/capacities/{i}/{j}: capacity must be nonnegative")
    if "edge_costs" in p:
        if len(p["edge_costs"]) != m:
            errs.append(f"/payload/edge_costs: expected {m} rows")
        errs += _ragged(p["edge_costs"], n, "/payload/edge_costs")
    if "commodity_costs" in p:
        cc = p["commodity_costs"]
        if len(cc) != n:
            errs.append(f"/payload/commodity_costs: expected {n} consumer blocks")
        for j, block in enumerate(cc):
            if len(block) != m:
                errs.append(f"/payload/commodity_costs/{j}: expected {m} supplier rows")
            errs += _ragged(block, l, f"/payload/commodity_costs/{j}")
    return errs


_CHECKS = {
    "matrix-graver": _check_matrix,
    "nfold-graver": _check_nfold_graver,
    "complexity": _check_complexity,
    "nfold-solve": _check_solve,
    "table": _check_table,
    "entry-set": _check_table,
    "transshipment": _check_transshipment,
    "transportation": _check_transportation,
}


def ext_list(values) -> tuple:
    return tuple(ext_int(v) for v in values)
