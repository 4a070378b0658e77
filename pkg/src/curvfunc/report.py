"""Run reports (JSON-compatible) and sweep CSV emission.

Floats are written with 17 significant digits so every value survives a
text roundtrip exactly. Reports carry no timestamps or timings, so the same
command and seed produce byte-identical output.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import __version__


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = format(x, ".17g")
    if s.lstrip("-").isdigit():
        s += ".0"  # stays a float after a roundtrip
    return s


def to_plain(obj: Any) -> Any:
    """Dataclasses, enums and arrays to JSON-compatible containers."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if not f.name.startswith("_")}
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return repr(obj)


def _emit(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        s = fmt_float(obj)
        return json.dumps(s) if s in ("nan", "inf", "-inf") else s
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if not obj:
        return "[]"
    if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
        return "[" + ", ".join(_emit(v, indent, level + 1) for v in obj) + "]"
    items = [f"{pad}{_emit(v, indent, level + 1)}" for v in obj]
    return "[\n" + ",\n".join(items) + "\n" + end + "]"


def dumps(obj: Any, indent: int = 2) -> str:
    return _emit(to_plain(obj), indent, 0) + "\n"


@dataclass
class SuiteOutcome:
    name: str
    passed: bool
    max_violation: float
    threshold: float
    trials: int
    counterexample: Optional[dict] = None
    details: dict = field(default_factory=dict)


@dataclass
class RunReport:
    command: str
    inputs: dict
    results: Any
    suite_outcomes: list = field(default_factory=list)
    tool_version: str = __version__
    seed: Optional[int] = None

    def to_json(self) -> str:
        return dumps(self)


def load_report(text: str) -> dict:
    return json.loads(text)


CSV_FIXED = ["residual_tensor_norm", "is_einstein", "E_norm_sq", "R", "min_sectional",
             "sectional_flag", "classification", "normalized_value"]


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


def rows_to_csv(param_names: tuple, rows: list) -> str:
    """rows: (t, s, CriticalPoint or None, status) tuples."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "s", *param_names, *CSV_FIXED])
    for t, s, p, status in rows:
        if p is None:
            blank = [""] * len(param_names)
            w.writerow([_cell(float(t)), _cell(float(s)), *blank, "", "", "", "", "", "", status, ""])
            continue
        w.writerow([_cell(float(t)), _cell(float(s)), *(_cell(v) for v in p.params),
                    _cell(p.residual_tensor_norm), _cell(p.is_einstein), _cell(p.E_norm_sq),
                    _cell(p.R), _cell(p.min_sectional), p.sectional_flag, p.classification,
                    _cell(p.normalized_value)])
    return buf.getvalue()
