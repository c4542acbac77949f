"""Spec-file ingestion and emission.

The on-disk format is JSON with exact scalars only: every numeric entry is a
string holding a rational literal like "3/2", a declared symbol like "nu",
or a +/- combination of such products ("1/2 + 3*nu").  Indices are 1-based
in files.  A character sum is a list of {"w": [integers], "c": "scalar"}.

Schema errors carry the JSON path of the offending field.  Loading validates
the quadratic bundle and the Courant axioms; the lenient loader used by the
master-equation diagnostic skips the axiom gate.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .fields import QQ, FunctionField, parse_scalar, format_scalar, RatFunc
from .algebra import FDUAL, GFIBER, FFIBER, PMOM_F, PMOM_B
from .model import (TorusBase, QuadraticLieAlgebraData, DissectionData,
                    ConnectionTriple, CourantSpec, validate_courant_axioms,
                    validate_quadratic_bundle)

_FAMILY_KEYS = {"xi": FDUAL, "r": GFIBER, "x": FFIBER, "pF": PMOM_F, "pB": PMOM_B}


class SpecFileError(ValueError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class AxiomError(ValueError):
    def __init__(self, report):
        super().__init__(str(report))
        self.report = report


def _expect(cond, path, message):
    if not cond:
        raise SpecFileError(path, message)


def _parse_charsum(field, d, raw, path):
    _expect(isinstance(raw, list), path, "character sum must be a list")
    out = {}
    for i, item in enumerate(raw):
        p = f"{path}[{i}]"
        _expect(isinstance(item, dict), p, "entry must be an object")
        w = item.get("w")
        _expect(isinstance(w, list) and len(w) == d and
                all(isinstance(x, int) for x in w), p + ".w",
                f"weight must be a list of {d} integers")
        c = item.get("c")
        _expect(isinstance(c, str), p + ".c", "scalar must be an exact string literal")
        try:
            val = parse_scalar(field, c)
        except (ValueError, KeyError) as exc:
            raise SpecFileError(p + ".c", str(exc))
        key = tuple(w)
        cur = out.get(key, field.zero)
        nv = cur + val
        if nv:
            out[key] = nv
        else:
            out.pop(key, None)
    return out


def _parse_vec(field, d, raw, path, nmax):
    _expect(isinstance(raw, dict), path, "must be an object mapping index to charsum")
    out = {}
    for key, cs in raw.items():
        try:
            c = int(key)
        except ValueError:
            raise SpecFileError(f"{path}.{key}", "index must be an integer")
        _expect(1 <= c <= nmax, f"{path}.{key}", f"index out of range 1..{nmax}")
        v = _parse_charsum(field, d, cs, f"{path}.{key}")
        if v:
            out[c - 1] = v
    return out


def _parse_indexed(field, d, raw, path, arity, ranges, value_rank):
    out = {}
    if raw is None:
        return out
    _expect(isinstance(raw, dict), path, "must be an object")
    for key, val in raw.items():
        parts = key.split(",")
        _expect(len(parts) == arity, f"{path}.{key}", f"key needs {arity} indices")
        try:
            idx = tuple(int(p) for p in parts)
        except ValueError:
            raise SpecFileError(f"{path}.{key}", "indices must be integers")
        for pos, (i, n) in enumerate(zip(idx, ranges)):
            _expect(1 <= i <= n, f"{path}.{key}", f"index {pos+1} out of range 1..{n}")
        out[tuple(i - 1 for i in idx)] = _parse_vec(field, d, val, f"{path}.{key}",
                                                    value_rank)
    return out


def parse_spec_dict(data, path="spec"):
    _expect(isinstance(data, dict), path, "top level must be an object")
    name = data.get("name", "unnamed")
    symbols = data.get("symbols", [])
    _expect(isinstance(symbols, list) and all(isinstance(s, str) for s in symbols),
            path + ".symbols", "symbols must be a list of identifiers")
    field = FunctionField(*symbols) if symbols else QQ

    base_raw = data.get("base")
    _expect(isinstance(base_raw, dict), path + ".base", "missing base section")
    d = base_raw.get("lattice_rank")
    _expect(isinstance(d, int) and d >= 0, path + ".base.lattice_rank",
            "must be a nonnegative integer")
    leaf_raw = base_raw.get("leaf_directions", [])
    _expect(isinstance(leaf_raw, list), path + ".base.leaf_directions", "must be a list")
    leaf = []
    for i, item in enumerate(leaf_raw):
        p = f"{path}.base.leaf_directions[{i}]"
        _expect(isinstance(item, dict) and "slope" in item, p, "needs a slope")
        slope = item["slope"]
        _expect(isinstance(slope, list) and len(slope) == d, p + ".slope",
                f"slope must be a list of {d} scalars")
        try:
            leaf.append([parse_scalar(field, str(s)) for s in slope])
        except (ValueError, KeyError) as exc:
            raise SpecFileError(p + ".slope", str(exc))
    trans_raw = base_raw.get("transverse_directions", [])
    _expect(isinstance(trans_raw, list) and
            all(isinstance(m, int) and 1 <= m <= d for m in trans_raw),
            path + ".base.transverse_directions",
            f"must be a list of lattice coordinates 1..{d}")
    base = TorusBase(field, d, leaf, [m - 1 for m in trans_raw])

    fib_raw = data.get("fiber", {"rank": 0})
    _expect(isinstance(fib_raw, dict), path + ".fiber", "must be an object")
    g_rank = fib_raw.get("rank", 0)
    _expect(isinstance(g_rank, int) and g_rank >= 0, path + ".fiber.rank",
            "must be a nonnegative integer")
    metric_raw = fib_raw.get("metric", [])
    _expect(isinstance(metric_raw, list) and len(metric_raw) == g_rank,
            path + ".fiber.metric", f"must be a {g_rank}x{g_rank} matrix")
    metric = []
    for i, row in enumerate(metric_raw):
        _expect(isinstance(row, list) and len(row) == g_rank,
                f"{path}.fiber.metric[{i}]", f"row must have {g_rank} entries")
        metric.append([parse_scalar(field, str(x)) for x in row])
    brackets = _parse_indexed(field, d, fib_raw.get("brackets"),
                              path + ".fiber.brackets", 2, (g_rank, g_rank), g_rank)
    fiber = QuadraticLieAlgebraData(field, d, g_rank, metric, brackets)

    n_leaf = base.n_leaf
    dis_raw = data.get("dissection", {})
    _expect(isinstance(dis_raw, dict), path + ".dissection", "must be an object")
    nablaG = _parse_indexed(field, d, dis_raw.get("nablaG"),
                            path + ".dissection.nablaG", 2, (n_leaf, g_rank), g_rank)
    Rmap = _parse_indexed(field, d, dis_raw.get("R"),
                          path + ".dissection.R", 2, (n_leaf, n_leaf), g_rank)
    H = {}
    h_raw = dis_raw.get("H")
    if h_raw is not None:
        _expect(isinstance(h_raw, dict), path + ".dissection.H", "must be an object")
        for key, cs in h_raw.items():
            parts = key.split(",")
            _expect(len(parts) == 3, f"{path}.dissection.H.{key}", "key needs 3 indices")
            idx = tuple(int(p) - 1 for p in parts)
            H[idx] = _parse_charsum(field, d, cs, f"{path}.dissection.H.{key}")
    dissection = DissectionData(nablaG, Rmap, H)

    tri_raw = data.get("triple", {})
    _expect(isinstance(tri_raw, dict), path + ".triple", "must be an object")
    nablaF = _parse_indexed(field, d, tri_raw.get("nablaF"),
                            path + ".triple.nablaF", 2, (n_leaf, n_leaf), n_leaf)
    nablaB = _parse_indexed(field, d, tri_raw.get("nablaB"),
                            path + ".triple.nablaB", 2, (base.n_trans, g_rank), g_rank)
    triple = ConnectionTriple(nablaF, nablaB)

    grading = None
    gr_raw = data.get("grading")
    if gr_raw is not None:
        _expect(isinstance(gr_raw, list), path + ".grading", "must be a list of rows")
        grading = []
        for i, row in enumerate(gr_raw):
            p = f"{path}.grading[{i}]"
            _expect(isinstance(row, dict) and "w" in row, p, "row needs a w part")
            wpart = row["w"]
            _expect(isinstance(wpart, list) and len(wpart) == d, p + ".w",
                    f"must be a list of {d} rationals")
            counts = {}
            for key, cval in row.get("counts", {}).items():
                fam, _, num = key.partition(":")
                _expect(fam in _FAMILY_KEYS, f"{p}.counts.{key}",
                        f"family must be one of {sorted(_FAMILY_KEYS)}")
                counts[(_FAMILY_KEYS[fam], int(num) - 1)] = Fraction(cval)
            grading.append((tuple(Fraction(x) for x in wpart), counts))

    spec = CourantSpec(name, field, base, fiber, dissection, triple,
                       grading_hint=grading)
    spec.task = data.get("task") or {}
    return spec


def load_spec(path, validate=True):
    """Parse, schema-check and (by default) axiom-check a spec file."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecFileError("spec", f"not valid JSON: {exc}")
    spec = parse_spec_dict(data)
    if validate:
        qrep = validate_quadratic_bundle(spec.fiber)
        if not qrep.ok():
            raise AxiomError(qrep)
        arep = validate_courant_axioms(spec)
        if not arep.ok():
            raise AxiomError(arep)
    return spec


def _emit_scalar(x):
    if isinstance(x, RatFunc):
        if x.den != (x.field.base.one,):
            raise ValueError("scalar has a nontrivial denominator; "
                             "not representable in spec-file syntax")
        return x.field.format_element(x)
    return str(Fraction(x))


def _emit_charsum(cs):
    return [{"w": list(w), "c": _emit_scalar(c)} for w, c in sorted(cs.items())]


def _emit_indexed(mapping, value_is_vec=True):
    out = {}
    for idx, val in sorted(mapping.items()):
        key = ",".join(str(i + 1) for i in idx)
        if value_is_vec:
            out[key] = {str(c + 1): _emit_charsum(v) for c, v in sorted(val.items())}
        else:
            out[key] = _emit_charsum(val)
    return out


_FAMILY_NAMES = {v: k for k, v in _FAMILY_KEYS.items()}


def emit_spec(spec):
    """Canonical JSON-serializable dict for a spec (deterministic)."""
    data = {"name": spec.name}
    if spec.field.symbols:
        data["symbols"] = list(spec.field.symbols)
    data["base"] = {
        "lattice_rank": spec.base.d,
        "leaf_directions": [{"slope": [_emit_scalar(c) for c in chi]}
                            for chi in spec.base.leaf],
        "transverse_directions": [m + 1 for m in spec.base.transverse],
    }
    data["fiber"] = {
        "rank": spec.g_rank,
        "metric": [[_emit_scalar(x) for x in row] for row in spec.fiber.metric],
        "brackets": _emit_indexed(spec.fiber.brackets),
    }
    data["dissection"] = {
        "nablaG": _emit_indexed(spec.dissection.nablaG),
        "R": _emit_indexed(spec.dissection.R),
        "H": _emit_indexed(spec.dissection.H, value_is_vec=False),
    }
    data["triple"] = {
        "nablaF": _emit_indexed(spec.triple.nablaF),
        "nablaB": _emit_indexed(spec.triple.nablaB),
    }
    if spec.grading_hint is not None:
        data["grading"] = [
            {"w": [str(x) for x in wrow],
             "counts": {f"{_FAMILY_NAMES[fam]}:{idx + 1}": str(c)
                        for (fam, idx), c in sorted(counts.items())}}
            for wrow, counts in spec.grading_hint
        ]
    return data


def save_spec(spec, path):
    with open(path, "w") as fh:
        json.dump(emit_spec(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")
