"""JSON measure documents and deterministic report serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

from .errors import DimlabError, InvalidMeasure
from .measures import (
    IFS,
    AtomFamily,
    AtomList,
    GeometricBlocks,
    PiecewiseDensity,
    SelfSimilar,
    SymbolicMeasure,
)


class DocumentError(DimlabError, ValueError):
    """Malformed measure document; carries line and column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


# -- deterministic JSON -----------------------------------------------------


def format_number(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with sorted keys and floats at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, int, float)):
        return format_number(obj)
    if hasattr(obj, "item") and not isinstance(obj, (list, tuple, dict, str)):
        return format_number(obj.item())
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(obj[k], indent, _level + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, bool)) or v is None for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _number(x):
    if isinstance(x, str) and x in ("inf", "-inf", "nan"):
        return float(x)
    return x


# -- measure documents ------------------------------------------------------

KINDS = ("atoms", "atom_family", "piecewise", "self_similar", "geometric_blocks")


@dataclass(frozen=True)
class MeasureDocument:
    """Tree form of a measure; keeps component order as written."""

    components: tuple[dict, ...]

    def to_tree(self) -> dict:
        return {"kind": "mixture", "components": list(self.components)}

    def to_measure(self) -> SymbolicMeasure:
        try:
            return SymbolicMeasure(tuple(_component(c) for c in self.components))
        except (KeyError, TypeError, ValueError) as exc:
            raise DocumentError(f"invalid component: {exc}") from exc

    @classmethod
    def from_measure(cls, mu: SymbolicMeasure) -> "MeasureDocument":
        return cls(tuple(_record(c) for c in mu.components))


def _component(rec: dict):
    kind = rec.get("kind")
    if kind == "atoms":
        pairs = rec["atoms"]
        return AtomList(tuple(float(p[0]) for p in pairs), tuple(float(p[1]) for p in pairs))
    if kind == "atom_family":
        n_max = rec.get("n_max")
        return AtomFamily(float(rec["p"]), float(rec["q"]), float(rec.get("c", 1.0)),
                          math.inf if n_max is None else int(n_max))
    if kind == "piecewise":
        return PiecewiseDensity(tuple((float(p["a"]), float(p["b"]), float(p["height"])) for p in rec["pieces"]))
    if kind == "self_similar":
        ifs = IFS(tuple(rec["ratios"]), tuple(rec.get("offsets", ())))
        return SelfSimilar(ifs, tuple(rec.get("weights", ())), float(rec.get("scale", 1.0)))
    if kind == "geometric_blocks":
        n_max = rec.get("n_max")
        return GeometricBlocks(float(rec["a"]), float(rec.get("coef", 1.0)),
                               math.inf if n_max is None else int(n_max))
    raise DocumentError(f"unknown component kind {kind!r}")


def _record(c) -> dict:
    if isinstance(c, AtomList):
        return {"kind": "atoms", "atoms": [[x, w] for x, w in zip(c.locations, c.weights)]}
    if isinstance(c, AtomFamily):
        return {"kind": "atom_family", "p": c.p, "q": c.q, "c": c.c,
                "n_max": None if math.isinf(c.n_max) else int(c.n_max)}
    if isinstance(c, PiecewiseDensity):
        return {"kind": "piecewise", "pieces": [{"a": a, "b": b, "height": h} for a, b, h in c.pieces]}
    if isinstance(c, SelfSimilar):
        return {"kind": "self_similar", "ratios": list(c.ifs.ratios), "offsets": list(c.ifs.offsets),
                "weights": list(c.weights), "scale": c.scale}
    if isinstance(c, GeometricBlocks):
        return {"kind": "geometric_blocks", "a": c.a, "coef": c.coef,
                "n_max": None if math.isinf(c.n_max) else int(c.n_max)}
    raise InvalidMeasure(f"no document form for {type(c).__name__}")


def _walk_numbers(obj):
    if isinstance(obj, dict):
        return {k: _walk_numbers(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_walk_numbers(v) for v in obj]
    return _number(obj)


def parse(text: str) -> MeasureDocument:
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(tree, dict) or tree.get("kind") != "mixture":
        raise DocumentError('top level must be an object with kind "mixture"', 1, 1)
    comps = tree.get("components")
    if not isinstance(comps, list):
        raise DocumentError("components must be a list", 1, 1)
    for i, c in enumerate(comps):
        if not isinstance(c, dict) or c.get("kind") not in KINDS:
            raise DocumentError(f"component {i} has an unknown kind")
    return MeasureDocument(tuple(_walk_numbers(c) for c in comps))


def serialize(doc: MeasureDocument) -> str:
    return dumps(doc.to_tree()) + "\n"


def load_measure(path) -> SymbolicMeasure:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read()).to_measure()
