"""JSON encoding of functions, families, graphs and reports.

Rationals are written as ``"num/den"`` strings and floats with ``repr`` so
that every document round-trips exactly.  :func:`dumps` is canonical (sorted
keys, fixed separators) which makes outputs byte-reproducible.
"""
from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import DomainError
from .funcspace import DyadicPath, Func, PLFunction, Polynomial
from .sampling import FamilySpec, FunctionFamily


def q_str(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def q_parse(s) -> Fraction:
    if isinstance(s, bool):
        raise DomainError("booleans are not rationals")
    if isinstance(s, (int, str)):
        return Fraction(s)
    if isinstance(s, float):
        return Fraction(s)
    raise DomainError(f"cannot read a rational from {s!r}")


def jsonable(obj):
    """Turn nested results into plain JSON types (Fractions become strings)."""
    if isinstance(obj, Fraction):
        return q_str(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return obj.item()
    return obj


def dumps(doc) -> str:
    return json.dumps(jsonable(doc), sort_keys=True, indent=1, ensure_ascii=True) + "\n"


def write_json(path, doc) -> None:
    Path(path).write_text(dumps(doc))


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read JSON from {path}: {exc}") from exc


def stamp(config: dict) -> dict:
    return {"tool": "larglab", "version": __version__, "config": config}


def function_to_json(f: Func) -> dict:
    if isinstance(f, PLFunction):
        return {"id": f.id, "kind": "pl", "points": [[q_str(x), q_str(y)] for x, y in f.points]}
    if isinstance(f, Polynomial):
        return {"id": f.id, "kind": "poly", "coeffs": list(f.coeffs)}
    if isinstance(f, DyadicPath):
        return {
            "id": f.id,
            "kind": "bm",
            "path": {"depth": f.depth, "values": list(f.values), "shift": f.shift},
        }
    raise DomainError(f"cannot encode {type(f).__name__}")


def function_from_json(doc: dict) -> Func:
    try:
        kind = doc["kind"]
        fid = doc.get("id")
        if kind == "pl":
            pts = tuple((q_parse(x), q_parse(y)) for x, y in doc["points"])
            return PLFunction(pts, id=fid)
        if kind == "poly":
            return Polynomial(tuple(doc["coeffs"]), id=fid)
        if kind == "bm":
            path = doc["path"]
            return DyadicPath(int(path["depth"]), tuple(path["values"]), path.get("shift", 0.0), id=fid)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"malformed function record: {exc}") from exc
    raise DomainError(f"unknown function kind {doc.get('kind')!r}")


def family_to_json(family: FunctionFamily, config: dict | None = None) -> dict:
    doc = {
        "spec": family.spec.as_dict() if family.spec is not None else None,
        "functions": [function_to_json(f) for f in family.functions],
    }
    if config is not None:
        doc["meta"] = stamp(config)
    return doc


def family_from_json(doc: dict) -> FunctionFamily:
    if not isinstance(doc, dict) or "functions" not in doc:
        raise DomainError("a family document needs a 'functions' list")
    spec = None
    if doc.get("spec"):
        s = doc["spec"]
        try:
            spec = FamilySpec(
                s["kind"], int(s["count"]), int(s["seed"]), s.get("bm_depth"), float(s.get("poisson_mean", 1.0))
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed family spec: {exc}") from exc
    return FunctionFamily(spec, tuple(function_from_json(f) for f in doc["functions"]))


def family_hash(family: FunctionFamily) -> str:
    """Content hash of the family (functions and spec, not metadata)."""
    return hashlib.sha256(dumps(family_to_json(family)).encode()).hexdigest()
