"""JSON bundle files: groupoids with optional Haar weights, cocycle, partition,
cover sequences, convolution elements, morphisms and inverse systems.

A groupoid bundle looks like::

    {
      "arrows": ["g11", "g12", "g21", "g22"],
      "units": ["g11", "g22"],
      "source": {"g11": "g11", ...},
      "target": {...},
      "compose": [["g12", "g21", "g22"], ...],
      "inverse": {...},
      "haar": {"g11": "1", ...},
      "cocycle": [["g12", "g21", "1/2"]],
      "partition": [["g11", "g22"]]
    }

Cocycle entries are turns: [g, h, "p/q"] stands for exp(2 pi i p/q); pairs not
listed get 0. Arrows left out of ``partition`` form singleton blocks.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .convolution import AlgebraContext, ConvElement, element
from .covers import Cover, NormalSequence, validate_normal_sequence
from .errors import BundleError, GroupoidError
from .groupoid import FiniteGroupoid, GroupoidMorphism, validate_groupoid, validate_morphism
from .haar import Cocycle, HaarSystem, cocycle_from_angles, counting_haar, validate_haar
from .limits import InverseSystem, inverse_system

GROUPOID_KEYS = ("arrows", "units", "source", "target", "compose", "inverse")
OPTIONAL_KEYS = ("haar", "cocycle", "partition", "covers", "coefficients", "codomain", "map", "system", "name")


class ParseError(BundleError):
    def __init__(self, message: str, line: int = 0, column: int = 0, path: str = ""):
        self.line, self.column, self.path = line, column, path
        where = f"{path}:" if path else ""
        super().__init__(f"{where}{line}:{column}: {message}")


class InvalidBundle(ParseError):
    """Well-formed file whose content fails a mathematical check."""

    def __init__(self, message: str, cause: Exception, line: int = 0, column: int = 0, path: str = ""):
        self.cause = cause
        super().__init__(message, line, column, path)


@dataclass(frozen=True, eq=False)
class GroupoidBundle:
    """Everything one file can carry; unused parts are None."""

    groupoid: FiniteGroupoid | None = None
    haar: HaarSystem | None = None
    cocycle: Cocycle | None = None
    partition: tuple | None = None
    covers: Mapping | None = None  # "ground" -> tuple, "sequence" -> NormalSequence; or "objects"/"arrows"
    coefficients: Mapping | None = None
    codomain: "GroupoidBundle | None" = None
    arrow_map: Mapping | None = None
    system: InverseSystem | None = None
    name: str | None = None

    def context(self) -> AlgebraContext:
        G = self._need_groupoid()
        w = self.haar if self.haar is not None else counting_haar(G)
        sigma = self.cocycle if self.cocycle is not None else cocycle_from_angles(G, {})
        return AlgebraContext(G, w, sigma)

    def morphism(self, domain: FiniteGroupoid | None = None) -> GroupoidMorphism:
        """The carried map; ``domain`` supplies the source groupoid for map-only files."""
        if self.codomain is None or self.arrow_map is None:
            raise BundleError("bundle carries no morphism")
        G = domain if domain is not None else self._need_groupoid()
        return validate_morphism(self.arrow_map, G, self.codomain._need_groupoid())

    def element(self, ctx: AlgebraContext) -> ConvElement:
        if self.coefficients is None:
            raise BundleError("bundle carries no coefficients")
        return element(ctx, self.coefficients)

    def _need_groupoid(self) -> FiniteGroupoid:
        if self.groupoid is None:
            raise BundleError("bundle carries no groupoid")
        return self.groupoid


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------

def parse_rational(text) -> Fraction:
    if isinstance(text, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(text, (int, str)):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(text)
    raise ValueError(f"not a rational: {text!r}")


def parse_scalar(value):
    """Numbers, "p/q" strings, or [re, im] pairs."""
    if isinstance(value, list):
        if len(value) != 2:
            raise ValueError("complex values are [re, im]")
        re, im = (float(parse_rational(v)) if isinstance(v, str) else float(v) for v in value)
        return complex(re, im)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"not a number: {value!r}")
    return value


def format_scalar(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, complex):
        if value.imag == 0:
            return value.real
        return [value.real, value.imag]
    return value


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

class _Locator:
    """Maps identifiers back to a line/column in the source text."""

    def __init__(self, text: str, path: str):
        self.text, self.path = text, path

    def position(self, token: str, after_key: str | None = None) -> tuple[int, int]:
        start = 0
        if after_key is not None:
            k = self.text.find(json.dumps(after_key))
            start = max(k, 0)
        i = self.text.find(json.dumps(token), start)
        if i < 0:
            i = self.text.find(json.dumps(token))
        if i < 0:
            return 0, 0
        line = self.text.count("\n", 0, i) + 1
        col = i - (self.text.rfind("\n", 0, i) + 1) + 1
        return line, col

    def error(self, message: str, token=None, after_key: str | None = None) -> ParseError:
        line, col = self._where(token, after_key)
        return ParseError(message, line, col, self.path)

    def invalid(self, message: str, cause: Exception, after_key: str | None = None) -> InvalidBundle:
        line, col = self._where(None, after_key)
        return InvalidBundle(message, cause, line, col, self.path)

    def _where(self, token, after_key):
        if token is not None:
            return self.position(str(token), after_key)
        if after_key is not None:
            return self.position(after_key)
        return 1, 1


def _declared(loc: _Locator, arrows: set, name, key: str):
    if not isinstance(name, str):
        raise loc.error(f"identifier in {key!r} must be a string, got {name!r}", after_key=key)
    if name not in arrows:
        raise loc.error(f"undeclared arrow {name!r} in {key!r}", name, key)
    return name


def _parse_groupoid(doc: Mapping, loc: _Locator) -> FiniteGroupoid:
    missing = [k for k in GROUPOID_KEYS if k not in doc]
    if missing:
        raise loc.error(f"missing field(s) {missing}")
    arrows = doc["arrows"]
    if not isinstance(arrows, list) or not all(isinstance(a, str) for a in arrows):
        raise loc.error("'arrows' must be a list of strings", after_key="arrows")
    if len(set(arrows)) != len(arrows):
        dup = next(a for a in arrows if arrows.count(a) > 1)
        raise loc.error(f"arrow {dup!r} declared twice", dup, "arrows")
    declared = set(arrows)
    units = [_declared(loc, declared, u, "units") for u in doc["units"]]
    maps = {}
    for key in ("source", "target", "inverse"):
        raw = doc[key]
        if not isinstance(raw, dict):
            raise loc.error(f"{key!r} must be an object", after_key=key)
        maps[key] = {_declared(loc, declared, k, key): _declared(loc, declared, v, key) for k, v in raw.items()}
    compose = {}
    for entry in doc["compose"]:
        if not isinstance(entry, list) or len(entry) != 3:
            raise loc.error(f"compose entries are [g, h, gh], got {entry!r}", after_key="compose")
        g, h, gh = (_declared(loc, declared, a, "compose") for a in entry)
        compose[(g, h)] = gh
    try:
        return validate_groupoid(
            dict(arrows=arrows, units=units, source=maps["source"], target=maps["target"],
                 compose=compose, inverse=maps["inverse"])
        )
    except GroupoidError as exc:
        raise loc.invalid(f"groupoid invalid: {exc}", exc) from exc


def _parse_blocks(raw, universe: set, loc: _Locator, key: str) -> tuple:
    if not isinstance(raw, list) or not all(isinstance(b, list) for b in raw):
        raise loc.error(f"{key!r} must be a list of lists", after_key=key)
    return tuple(tuple(_declared(loc, universe, x, key) for x in b) for b in raw)


def _parse_sequence(raw, ground: tuple, loc: _Locator, key: str) -> NormalSequence:
    universe = set(ground)
    try:
        covers = [Cover(ground, _parse_blocks(c, universe, loc, key)) for c in raw]
        return validate_normal_sequence(covers)
    except GroupoidError as exc:
        if isinstance(exc, ParseError):
            raise
        raise loc.invalid(f"cover sequence invalid: {exc}", exc, after_key=key) from exc


def _parse_covers(raw, G: FiniteGroupoid | None, loc: _Locator) -> dict:
    if isinstance(raw, dict) and "sequence" in raw:
        ground = raw.get("ground")
        if ground is None:
            ground = list(dict.fromkeys(x for m in raw["sequence"][0] for x in m)) if raw["sequence"] else []
        ground = tuple(ground)
        return {"ground": ground, "sequence": _parse_sequence(raw["sequence"], ground, loc, "sequence")}
    if isinstance(raw, dict) and {"objects", "arrows"} <= set(raw):
        if G is None:
            raise loc.error("object/arrow cover sequences need a groupoid", after_key="covers")
        return {
            "objects": _parse_sequence(raw["objects"], tuple(G.units), loc, "objects"),
            "arrows": _parse_sequence(raw["arrows"], tuple(G.arrows), loc, "arrows"),
        }
    raise loc.error("'covers' needs either 'sequence' or 'objects' and 'arrows'", after_key="covers")


def _parse_doc(doc: Any, loc: _Locator) -> GroupoidBundle:
    if not isinstance(doc, dict):
        raise loc.error("a bundle is a JSON object")
    unknown = set(doc) - set(GROUPOID_KEYS) - set(OPTIONAL_KEYS)
    if unknown:
        k = sorted(unknown)[0]
        raise loc.error(f"unknown field {k!r}", k)
    has_groupoid = any(k in doc for k in GROUPOID_KEYS)
    G = _parse_groupoid(doc, loc) if has_groupoid else None
    parts: dict = {"groupoid": G, "name": doc.get("name")}
    declared = set(G.arrows) if G else set()

    if "haar" in doc:
        if G is None:
            raise loc.error("'haar' needs a groupoid", after_key="haar")
        try:
            weights = {_declared(loc, declared, g, "haar"): parse_rational(v) for g, v in doc["haar"].items()}
            parts["haar"] = validate_haar(G, weights)
        except (GroupoidError, ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise loc.invalid(f"Haar system invalid: {exc}", exc, after_key="haar") from exc
    if "cocycle" in doc:
        if G is None:
            raise loc.error("'cocycle' needs a groupoid", after_key="cocycle")
        angles = {}
        for entry in doc["cocycle"]:
            if not isinstance(entry, list) or len(entry) != 3:
                raise loc.error(f"cocycle entries are [g, h, turns], got {entry!r}", after_key="cocycle")
            g = _declared(loc, declared, entry[0], "cocycle")
            h = _declared(loc, declared, entry[1], "cocycle")
            if not G.composable(g, h):
                raise loc.error(f"cocycle given on non-composable pair ({g}, {h})", g, "cocycle")
            try:
                angles[(g, h)] = parse_rational(entry[2])
            except (ValueError, ZeroDivisionError) as exc:
                raise loc.error(f"bad angle {entry[2]!r}", after_key="cocycle") from exc
        try:
            parts["cocycle"] = cocycle_from_angles(G, angles)
        except GroupoidError as exc:
            raise loc.invalid(f"cocycle invalid: {exc}", exc, after_key="cocycle") from exc
    if "partition" in doc:
        universe = declared if G else {x for b in doc["partition"] if isinstance(b, list) for x in b}
        parts["partition"] = _parse_blocks(doc["partition"], universe, loc, "partition")
    if "covers" in doc:
        parts["covers"] = _parse_covers(doc["covers"], G, loc)
    if "coefficients" in doc:
        raw = doc["coefficients"]
        if not isinstance(raw, dict):
            raise loc.error("'coefficients' must be an object", after_key="coefficients")
        coeffs = {}
        for g, v in raw.items():
            if G is not None:
                _declared(loc, declared, g, "coefficients")
            try:
                coeffs[g] = parse_scalar(v)
            except (ValueError, ZeroDivisionError) as exc:
                raise loc.error(f"bad coefficient for {g!r}: {v!r}", g, "coefficients") from exc
        parts["coefficients"] = coeffs
    if "codomain" in doc or "map" in doc:
        if "codomain" not in doc or "map" not in doc:
            raise loc.error("a morphism needs both 'codomain' and 'map'", after_key="map")
        H = _parse_doc(doc["codomain"], loc)
        target = set(H._need_groupoid().arrows)
        raw = doc["map"]
        if not isinstance(raw, dict):
            raise loc.error("'map' must be an object", after_key="map")
        amap = {}
        for g, h in raw.items():
            amap[_declared(loc, declared, g, "map") if G else g] = _declared(loc, target, h, "map")
        if G is not None:
            try:
                validate_morphism(amap, G, H.groupoid)
            except GroupoidError as exc:
                raise loc.invalid(f"morphism invalid: {exc}", exc, after_key="map") from exc
        parts["codomain"], parts["arrow_map"] = H, amap
    if "system" in doc:
        parts["system"] = _parse_system(doc["system"], loc)
    return GroupoidBundle(**parts)


def _parse_system(raw, loc: _Locator) -> InverseSystem:
    if not isinstance(raw, dict) or "nodes" not in raw:
        raise loc.error("'system' needs 'nodes'", after_key="system")
    contexts = {}
    for node in raw["nodes"]:
        if not isinstance(node, dict) or "name" not in node:
            raise loc.error("every node needs a 'name'", after_key="nodes")
        sub = _parse_doc(node, loc)
        if sub.name in contexts:
            raise loc.error(f"node {sub.name!r} declared twice", sub.name, "nodes")
        contexts[sub.name] = sub.context()
    order = []
    for pair in raw.get("order", []):
        if not isinstance(pair, list) or len(pair) != 2 or not all(p in contexts for p in pair):
            raise loc.error(f"order entries are [alpha, beta] over declared nodes, got {pair!r}", after_key="order")
        order.append(tuple(pair))
    bonds = {}
    for bond in raw.get("bonds", []):
        a, b = bond.get("from"), bond.get("to")
        if a not in contexts or b not in contexts:
            raise loc.error(f"bond between undeclared nodes {a!r} -> {b!r}", after_key="bonds")
        src, dst = set(contexts[a].groupoid.arrows), set(contexts[b].groupoid.arrows)
        amap = {_declared(loc, src, g, "bonds"): _declared(loc, dst, h, "bonds") for g, h in bond["map"].items()}
        bonds[(a, b)] = amap
        if (a, b) not in order:
            order.append((a, b))
    try:
        return inverse_system(contexts, order, bonds)
    except GroupoidError as exc:
        raise loc.invalid(f"system invalid: {exc}", exc, after_key="system") from exc


def parse_text(text: str, path: str = "") -> GroupoidBundle:
    loc = _Locator(text, path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno, path) from exc
    return _parse_doc(doc, loc)


def parse_bundle(path) -> GroupoidBundle:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8: {exc.reason}", 1, 1, str(path)) from exc
    return parse_text(text, str(path))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def groupoid_doc(G: FiniteGroupoid) -> dict:
    raw = G.to_raw()
    return {
        "arrows": list(G.arrows),
        "units": list(G.units),
        "source": {g: G.s(g) for g in G.arrows},
        "target": {g: G.t(g) for g in G.arrows},
        "compose": [list(t) for t in raw["compose"]],
        "inverse": {g: G.inv(g) for g in G.arrows},
    }


def _angle_entries(sigma: Cocycle) -> list:
    import cmath

    G = sigma.groupoid
    out = []
    for p in G.composable_pairs:
        if sigma.angles is not None:
            a = sigma.angles[p]
        else:
            a = Fraction(cmath.phase(sigma(*p)) / (2 * cmath.pi)).limit_denominator(10**6) % 1
        if a != 0:
            out.append([p[0], p[1], str(a)])
    return out


def bundle_doc(b: GroupoidBundle) -> dict:
    doc: dict = {}
    if b.name is not None:
        doc["name"] = b.name
    if b.groupoid is not None:
        doc.update(groupoid_doc(b.groupoid))
    if b.haar is not None:
        doc["haar"] = {g: str(b.haar[g]) for g in b.groupoid.arrows}
    if b.cocycle is not None:
        entries = _angle_entries(b.cocycle)
        if entries:
            doc["cocycle"] = entries
    if b.partition is not None:
        doc["partition"] = [list(block) for block in b.partition]
    if b.covers is not None:
        if "sequence" in b.covers:
            ground = b.covers["ground"]
            doc["covers"] = {"ground": list(ground), "sequence": [_cover_doc(c, ground) for c in b.covers["sequence"].covers]}
        else:
            doc["covers"] = {
                k: [_cover_doc(c, c.ground) for c in b.covers[k].covers] for k in ("objects", "arrows")
            }
    if b.coefficients is not None:
        doc["coefficients"] = {g: format_scalar(v) for g, v in b.coefficients.items()}
    if b.codomain is not None:
        doc["codomain"] = bundle_doc(b.codomain)
        keys = b.groupoid.arrows if b.groupoid is not None else list(b.arrow_map)
        doc["map"] = {g: b.arrow_map[g] for g in keys}
    if b.system is not None:
        doc["system"] = system_doc(b.system)
    return doc


def _cover_doc(c: Cover, ground) -> list:
    pos = {x: i for i, x in enumerate(ground)}
    members = [sorted(m, key=pos.__getitem__) for m in c.members]
    return sorted(members, key=lambda m: [pos[x] for x in m])


def context_doc(ctx: AlgebraContext, name: str | None = None) -> dict:
    return bundle_doc(GroupoidBundle(ctx.groupoid, ctx.haar, ctx.cocycle, name=name))


def system_doc(sys: InverseSystem) -> dict:
    given = [(a, b) for a, b in sys.comparable_pairs()]
    return {
        "nodes": [context_doc(sys.contexts[a], a) for a in sys.nodes],
        "order": [list(p) for p in given],
        "bonds": [
            {"from": a, "to": b, "map": {g: sys.bonds[(a, b)](g) for g in sys.groupoid(a).arrows}}
            for a, b in given
        ],
    }


def dumps(doc: Any, indent: int = 0) -> str:
    """Canonical text: one key per line, short lists inline."""
    pad = "  " * indent
    if isinstance(doc, dict) and doc:
        inner = [f'{pad}  {json.dumps(k)}: {dumps(v, indent + 1).lstrip()}' for k, v in doc.items()]
        return pad + "{\n" + ",\n".join(inner) + "\n" + pad + "}"
    if isinstance(doc, list) and doc and any(isinstance(x, (dict, list)) for x in doc):
        flat = json.dumps(doc)
        if len(flat) <= 72 and not any(isinstance(x, dict) for x in doc):
            return pad + flat
        inner = [dumps(x, indent + 1) for x in doc]
        return pad + "[\n" + ",\n".join(inner) + "\n" + pad + "]"
    return pad + json.dumps(doc)


def serialize_text(b: GroupoidBundle) -> str:
    return dumps(bundle_doc(b)) + "\n"


def serialize_bundle(b: GroupoidBundle, path) -> None:
    Path(path).write_text(serialize_text(b), encoding="utf-8")
