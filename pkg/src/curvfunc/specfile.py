"""Geometry spec files.

A spec file is YAML with a top-level ``kind`` and a flat ``params`` mapping::

    kind: berger
    params:
      x: 0.5

Kinds and their params:

    round_sphere           n, radius (default 1)
    product_sphere_sphere  a, b
    sphere_flat            n, a, flat_lengths (optional list of n-2 lengths)
    berger                 x
    left_invariant         Q (3x3 list), and either structure: su2 (optional
                           scale, c = scale * the unit round constants) or
                           c (3x3x3 list, c[k][i][j] = c^k_ij)
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from . import geometry as geo
from .errors import InvalidInput


class SpecError(InvalidInput):
    """Parse or schema error, with location when known."""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


_SCHEMA = {
    "round_sphere": ({"n"}, {"radius"}),
    "product_sphere_sphere": ({"a", "b"}, set()),
    "sphere_flat": ({"n", "a"}, {"flat_lengths"}),
    "berger": ({"x"}, set()),
    "left_invariant": ({"Q"}, {"structure", "scale", "c"}),
}


def _key_lines(text: str) -> dict:
    """Line numbers (1-based) of top-level and params keys."""
    lines = {}
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return lines
    if not isinstance(node, yaml.MappingNode):
        return lines
    for k, v in node.value:
        lines[k.value] = k.start_mark.line + 1
        if k.value == "params" and isinstance(v, yaml.MappingNode):
            for pk, _ in v.value:
                lines[f"params.{pk.value}"] = pk.start_mark.line + 1
    return lines


def _number(value: Any, field: str, lines: dict, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecError(f"expected a number, got {value!r}", lines.get(field), field)
    if integer:
        if int(value) != value:
            raise SpecError(f"expected an integer, got {value!r}", lines.get(field), field)
        return int(value)
    return float(value)


def _array(value: Any, shape: tuple, field: str, lines: dict) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise SpecError("expected a numeric array", lines.get(field), field) from None
    if arr.shape != shape:
        raise SpecError(f"expected shape {shape}, got {arr.shape}", lines.get(field), field)
    return arr


def parse_spec_text(text: str) -> geo.GeometrySpec:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise SpecError(f"malformed YAML: {getattr(exc, 'problem', exc)}",
                        mark.line + 1 if mark else None) from None
    lines = _key_lines(text)
    if not isinstance(doc, dict):
        raise SpecError("spec must be a mapping with 'kind' and 'params'")
    unknown = set(doc) - {"kind", "params"}
    if unknown:
        key = sorted(unknown)[0]
        raise SpecError("unknown top-level field", lines.get(key), key)
    kind = doc.get("kind")
    if kind not in _SCHEMA:
        raise SpecError(f"kind must be one of {sorted(_SCHEMA)}, got {kind!r}",
                        lines.get("kind"), "kind")
    params = doc.get("params") or {}
    if not isinstance(params, dict):
        raise SpecError("params must be a mapping", lines.get("params"), "params")
    required, optional = _SCHEMA[kind]
    for key in sorted(required - set(params)):
        raise SpecError("missing required parameter", lines.get("params"), f"params.{key}")
    for key in sorted(set(params) - required - optional):
        raise SpecError(f"not a parameter of {kind}", lines.get(f"params.{key}"), f"params.{key}")

    def num(key, integer=False):
        return _number(params[key], f"params.{key}", lines, integer)

    try:
        if kind == "round_sphere":
            return geo.RoundSphere(num("n", True), num("radius") if "radius" in params else 1.0)
        if kind == "product_sphere_sphere":
            return geo.ProductSphereSphere(num("a"), num("b"))
        if kind == "sphere_flat":
            n = num("n", True)
            lengths = params.get("flat_lengths")
            if lengths is not None:
                lengths = tuple(_array(lengths, (n - 2,), "params.flat_lengths", lines).tolist())
            return geo.SphereFlat(n, num("a"), lengths)
        if kind == "berger":
            return geo.Berger(num("x"))
        Q = _array(params["Q"], (3, 3), "params.Q", lines)
        if "c" in params:
            if "structure" in params or "scale" in params:
                raise SpecError("give either c or structure/scale", lines.get("params.c"), "params.c")
            c = _array(params["c"], (3, 3, 3), "params.c", lines)
        else:
            structure = params.get("structure", "su2")
            if structure != "su2":
                raise SpecError("only 'su2' is a named structure", lines.get("params.structure"),
                                "params.structure")
            scale = num("scale") if "scale" in params else 1.0
            c = scale * geo.su2_structure_constants()
        return geo.LeftInvariant(c, Q)
    except SpecError:
        raise
    except InvalidInput as exc:
        raise SpecError(str(exc), lines.get("params"), "params") from None


def load_spec(path) -> geo.GeometrySpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read spec file: {exc.strerror}") from None
    return parse_spec_text(text)


def spec_to_dict(spec: geo.GeometrySpec) -> dict:
    """Inverse of parsing, used to echo inputs in reports."""
    if isinstance(spec, geo.RoundSphere):
        return {"kind": "round_sphere", "params": {"n": spec.n, "radius": spec.radius}}
    if isinstance(spec, geo.ProductSphereSphere):
        return {"kind": "product_sphere_sphere", "params": {"a": spec.a, "b": spec.b}}
    if isinstance(spec, geo.SphereFlat):
        p = {"n": spec.n, "a": spec.a}
        if spec.flat_lengths is not None:
            p["flat_lengths"] = list(spec.flat_lengths)
        return {"kind": "sphere_flat", "params": p}
    if isinstance(spec, geo.Berger):
        return {"kind": "berger", "params": {"x": spec.x}}
    return {"kind": "left_invariant", "params": {"Q": np.asarray(spec.Q).tolist(),
                                                 "c": np.asarray(spec.c).tolist()}}
