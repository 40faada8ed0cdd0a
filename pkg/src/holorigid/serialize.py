"""JSON schemas for maps, weights, jets, and Henon data.

Complex numbers travel as [re, im] pairs.  Loaders raise SchemaError with a
message naming the offending field; dumpers emit plain dict/list structures
ready for json.dumps.
"""

from __future__ import annotations

import json

from .errors import SchemaError
from .jets import Jet, JetMap
from .dynamics import PolyFunc, PolyMap


def _cnum(obj, where: str) -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    if (isinstance(obj, (list, tuple)) and len(obj) == 2
            and all(isinstance(x, (int, float)) for x in obj)):
        return complex(obj[0], obj[1])
    raise SchemaError(f"{where}: expected a number or [re, im] pair")


def _require(obj, key, where, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{where}: missing field '{key}'")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise SchemaError(f"{where}.{key}: wrong type")
    return val


def encode(value):
    """Recursively convert complex scalars/arrays to JSON-ready structures."""
    import numpy as np

    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if isinstance(value, np.ndarray):
        return [encode(v) for v in value.tolist()]
    if isinstance(value, complex) or isinstance(value, np.complexfloating):
        z = complex(value)
        return [z.real, z.imag]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, float) or isinstance(value, int) or value is None:
        return value
    if isinstance(value, (str, bool)):
        return value
    raise TypeError(f"cannot encode {type(value)!r}")


def _load_terms(items, dim, where, cap=None) -> dict:
    if not isinstance(items, list):
        raise SchemaError(f"{where}: expected a list of terms")
    table = {}
    for k, term in enumerate(items):
        spot = f"{where}[{k}]"
        alpha = _require(term, "alpha", spot, list)
        if len(alpha) != dim or not all(isinstance(a, int) and a >= 0 for a in alpha):
            raise SchemaError(f"{spot}.alpha: expected {dim} non-negative integers")
        if cap is not None and sum(alpha) > cap:
            raise SchemaError(f"{spot}.alpha: total degree {sum(alpha)} "
                              f"exceeds cap {cap}")
        re = term.get("re", 0.0)
        im = term.get("im", 0.0)
        if not isinstance(re, (int, float)) or not isinstance(im, (int, float)):
            raise SchemaError(f"{spot}: re/im must be numbers")
        key = tuple(alpha)
        table[key] = table.get(key, 0j) + complex(re, im)
    return table


def _dump_terms(table) -> list:
    out = []
    for alpha in sorted(table, key=lambda a: (sum(a), tuple(-x for x in a))):
        c = complex(table[alpha])
        out.append({"alpha": list(alpha), "re": c.real, "im": c.imag})
    return out


def load_polymap(obj) -> PolyMap:
    dim = _require(obj, "dim", "map", int)
    if dim < 1:
        raise SchemaError("map.dim: must be >= 1")
    comps = _require(obj, "components", "map", list)
    if len(comps) != dim:
        raise SchemaError(f"map.components: expected {dim} entries, got {len(comps)}")
    tables = tuple(_load_terms(c, dim, f"map.components[{i}]")
                   for i, c in enumerate(comps))
    return PolyMap(dim, tables)


def dump_polymap(f: PolyMap) -> dict:
    return {"dim": f.dim, "components": [_dump_terms(c) for c in f.components]}


def load_weight(obj) -> PolyFunc:
    dim = _require(obj, "dim", "weight", int)
    terms = _require(obj, "terms", "weight", list)
    return PolyFunc(dim, _load_terms(terms, dim, "weight.terms"))


def dump_weight(u: PolyFunc) -> dict:
    return {"dim": u.dim, "terms": _dump_terms(u.terms)}


def _load_base(obj, dim, where) -> tuple:
    base = _require(obj, "base", where, list)
    if len(base) != dim:
        raise SchemaError(f"{where}.base: expected {dim} entries")
    return tuple(_cnum(b, f"{where}.base[{i}]") for i, b in enumerate(base))


def load_jet(obj) -> Jet:
    dim = _require(obj, "dim", "jet", int)
    cap = _require(obj, "cap", "jet", int)
    if cap < 0:
        raise SchemaError("jet.cap: must be >= 0")
    base = _load_base(obj, dim, "jet")
    terms = _load_terms(_require(obj, "terms", "jet", list), dim, "jet.terms", cap)
    return Jet(dim, cap, base, terms)


def dump_jet(j: Jet) -> dict:
    return {"dim": j.dim, "cap": j.cap,
            "base": [[b.real, b.imag] for b in j.base],
            "terms": _dump_terms(j.coeffs)}


def load_jetmap(obj) -> JetMap:
    dim = _require(obj, "dim", "jetmap", int)
    cap = _require(obj, "cap", "jetmap", int)
    base = _load_base(obj, dim, "jetmap")
    comps = _require(obj, "components", "jetmap", list)
    jets = tuple(
        Jet(dim, cap, base,
            _load_terms(c, dim, f"jetmap.components[{i}]", cap))
        for i, c in enumerate(comps))
    return JetMap(dim, len(jets), jets)


def load_henon(obj):
    from .henon import GeneralizedHenon, HenonComposition

    factors = _require(obj, "factors", "henon", list)
    if not factors:
        raise SchemaError("henon.factors: must be nonempty")
    out = []
    for i, fac in enumerate(factors):
        where = f"henon.factors[{i}]"
        p = _require(fac, "p", where, list)
        coeffs = tuple(_cnum(c, f"{where}.p[{k}]") for k, c in enumerate(p))
        delta = _cnum(_require(fac, "delta", where), f"{where}.delta")
        if delta == 0:
            raise SchemaError(f"{where}.delta: must be nonzero")
        if len(coeffs) < 3 or coeffs[-1] == 0:
            raise SchemaError(f"{where}.p: polynomial degree must be >= 2")
        out.append(GeneralizedHenon(coeffs, delta))
    return HenonComposition(tuple(out))


def read_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise SchemaError(f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})")
