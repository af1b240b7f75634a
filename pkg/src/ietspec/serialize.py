"""JSON form of an exchange: ``{"n", "perm", "lambda", "origin", "field"}`` with scalars as strings."""

from __future__ import annotations

import json

from .errors import ParseError
from .iet import Iet, Permutation, golden_rotation, rotation
from .scalar import QuadraticField, field_from_json, format_scalar, parse_scalar

PRESETS = ("golden",)


def iet_to_json(E: Iet) -> dict:
    return {
        "n": E.n,
        "perm": list(E.perm.images),
        "lambda": [format_scalar(v) for v in E.lengths.values],
        "origin": format_scalar(E.origin),
        "field": E.field.to_json(),
    }


def iet_from_json(doc) -> Iet:
    """Build an exchange from its JSON description (or a preset name such as ``"golden"``)."""
    if isinstance(doc, str):
        if doc == "golden":
            return golden_rotation()
        raise ParseError(f"unknown preset {doc!r}")
    if not isinstance(doc, dict):
        raise ParseError("exchange description must be an object")
    if "rotation" in doc:
        return rotation(parse_scalar(str(doc["rotation"])))
    try:
        perm = Permutation(tuple(int(i) for i in doc["perm"]))
        raw = doc["lambda"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad exchange description: {exc}") from exc
    field = field_from_json(doc.get("field", "rational"))
    d = field.d if isinstance(field, QuadraticField) else None
    lengths = tuple(parse_scalar(str(v), d) for v in raw)
    origin = parse_scalar(str(doc.get("origin", "0")), d)
    if "n" in doc and int(doc["n"]) != len(lengths):
        raise ParseError(f"n = {doc['n']} but {len(lengths)} lengths given")
    return Iet(perm, lengths, origin)


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
