"""JSON input formats for fans, modules, sheaves and line bundles."""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Tuple

from .errors import ParseError, ToricKoszulError
from .fan import Cone, Fan, build_fan, vadd
from .modules import FgGradedModule, ModuleMorphism, presented
from .sheaves import SheafOfModules, standard_open, standard_point, structure_sheaf
from .stalks import StalkAlgebra


def load_json(path) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None


def _int_vec(x, where: str) -> Tuple[int, ...]:
    if not isinstance(x, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in x):
        raise ParseError(f"{where}: expected a list of integers, got {x!r}")
    return tuple(x)


def _fraction(x, where: str) -> Fraction:
    try:
        if isinstance(x, bool):
            raise ValueError
        if isinstance(x, float):
            raise ValueError("floating point coefficients are not accepted")
        return Fraction(x)
    except (ValueError, TypeError, ZeroDivisionError):
        raise ParseError(f"{where}: not a rational number: {x!r}") from None


def parse_cone_key(key: str, where: str = "cone") -> Cone:
    text = key.strip().strip("[]").strip()
    if not text:
        return ()
    try:
        return tuple(sorted(int(p) for p in text.split(",")))
    except ValueError:
        raise ParseError(f"{where}: bad cone key {key!r}") from None


def fan_from_json(doc: Dict, where: str = "fan") -> Fan:
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: expected an object")
    for key in ("rank", "rays", "max_cones"):
        if key not in doc:
            raise ParseError(f"{where}: missing field {key!r}")
    rank = doc["rank"]
    if not isinstance(rank, int) or rank < 0:
        raise ParseError(f"{where}.rank: expected a natural number")
    rays = [_int_vec(r, f"{where}.rays[{i}]") for i, r in enumerate(doc["rays"])]
    cones = [_int_vec(c, f"{where}.max_cones[{i}]") for i, c in enumerate(doc["max_cones"])]
    orientation = doc.get("orientation", 1)
    if orientation not in (1, -1):
        raise ParseError(f"{where}.orientation: must be 1 or -1")
    return build_fan(rank, rays, cones, orientation)


def load_fan(path) -> Fan:
    return fan_from_json(load_json(path), str(path))


def module_from_json(fan: Fan, doc: Dict, where: str = "module", cone: Cone = None) -> FgGradedModule:
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: expected an object")
    c = parse_cone_key(",".join(str(i) for i in doc["cone"])) if "cone" in doc else cone
    if c is None:
        raise ParseError(f"{where}: missing field 'cone'")
    if cone is not None and c != cone:
        raise ParseError(f"{where}: cone {list(c)} does not match its key {list(cone)}")
    if c not in fan.cones:
        raise ParseError(f"{where}: {list(c)} is not a cone of the fan")
    flavor = doc.get("flavor", "A")
    if flavor not in ("A", "B"):
        raise ParseError(f"{where}.flavor: must be 'A' or 'B'")
    gens = [_int_vec(g, f"{where}.gens[{i}]") for i, g in enumerate(doc.get("gens", []))]
    entries = doc.get("relations", [])
    cols: Dict[int, Dict] = {}
    for k, e in enumerate(entries):
        w = f"{where}.relations[{k}]"
        try:
            row, col = int(e["row"]), int(e["col"])
            deg = _int_vec(e["degree"], w + ".degree")
        except (KeyError, TypeError, ValueError):
            raise ParseError(f"{w}: needs integer 'row', 'col' and a 'degree' vector") from None
        if not 0 <= row < len(gens):
            raise ParseError(f"{w}: row {row} out of range")
        coeff = _fraction(e.get("coeff", 1), w + ".coeff")
        cdeg = vadd(gens[row], deg)
        slot = cols.setdefault(col, {"degree": cdeg, "vec": [Fraction(0)] * len(gens)})
        if slot["degree"] != cdeg:
            raise ParseError(f"{w}: column {col} has inconsistent degrees {slot['degree']} and {cdeg}")
        slot["vec"][row] += coeff
    rels = [(cols[j]["degree"], cols[j]["vec"]) for j in sorted(cols)]
    try:
        return presented(StalkAlgebra(fan, c, flavor), gens, rels)
    except ToricKoszulError as exc:
        raise ParseError(f"{where}: {exc}") from None


def sheaf_from_json(fan: Fan, doc: Dict, where: str = "sheaf"):
    """A sheaf description, a line bundle, a list of line bundles, or a standard object.

    Returns either a SheafOfModules or line-bundle data understood by psi.
    """
    from .geometry import line_bundle
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: expected an object")
    try:
        if "line_bundle" in doc:
            return line_bundle(fan, _int_vec(doc["line_bundle"], where + ".line_bundle"))
        if "line_bundles" in doc:
            return [line_bundle(fan, _int_vec(d, f"{where}.line_bundles[{i}]"))
                    for i, d in enumerate(doc["line_bundles"])]
        if "structure_sheaf" in doc:
            return structure_sheaf(fan)
        for key, ctor in (("standard_open", standard_open), ("standard_point", standard_point)):
            if key in doc:
                spec = doc[key]
                cone = parse_cone_key(",".join(str(i) for i in spec.get("cone", [])))
                twist = _int_vec(spec.get("twist", [0] * fan.rank), f"{where}.{key}.twist")
                return ctor(fan, cone, twist)
    except ToricKoszulError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"{where}: {exc}") from None
    if "stalks" not in doc:
        raise ParseError(f"{where}: expected 'stalks', 'line_bundle', 'line_bundles', "
                         "'structure_sheaf', 'standard_open' or 'standard_point'")
    flavor = doc.get("flavor", "A")
    stalks = {}
    for key, mdoc in doc["stalks"].items():
        cone = parse_cone_key(key, f"{where}.stalks")
        stalks[cone] = module_from_json(fan, {"flavor": flavor, **mdoc}, f"{where}.stalks[{key!r}]", cone)
    res = {}
    for k, r in enumerate(doc.get("restrictions", [])):
        w = f"{where}.restrictions[{k}]"
        try:
            s = parse_cone_key(",".join(str(i) for i in r["from"]))
            t = parse_cone_key(",".join(str(i) for i in r["to"]))
            mat = [[_fraction(x, w + ".matrix") for x in row] for row in r["matrix"]]
        except (KeyError, TypeError):
            raise ParseError(f"{w}: needs 'from', 'to' and 'matrix'") from None
        zero = lambda c: presented(StalkAlgebra(fan, c, flavor), [])  # noqa: E731
        src = stalks.setdefault(s, zero(s)) if s in fan.cones else None
        tgt = stalks.setdefault(t, zero(t)) if t in fan.cones else None
        if src is None or tgt is None:
            raise ParseError(f"{w}: cone not in the fan")
        try:
            res[(s, t)] = ModuleMorphism(src, tgt, mat)
        except (ToricKoszulError, ValueError) as exc:
            raise ParseError(f"{w}: {exc}") from None
    try:
        return SheafOfModules(fan, flavor, stalks, res)
    except ToricKoszulError as exc:
        raise ParseError(f"{where}: {exc}") from None


def load_sheaf(fan: Fan, path):
    return sheaf_from_json(fan, load_json(path), str(path))
