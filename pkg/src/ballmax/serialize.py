"""Instance files and report JSON.

Reports print every float with 17 significant digits, which round-trips
IEEE doubles exactly.  Non-finite values become the strings ``"inf"``,
``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import json
import math
from importlib import resources

import jsonschema
import numpy as np

from .errors import ValidationError
from .geometry import Instance

INSTANCE_SCHEMA = "ballmax.instance.v1"
REPORT_SCHEMA = "ballmax.report.v1"


def _load_schema():
    text = resources.files("ballmax").joinpath("schemas/instance.v1.json").read_text()
    return json.loads(text)


def instance_from_dict(data) -> Instance:
    """Validate against the v1 schema, then build an :class:`Instance`.

    Beyond the schema: every point has length ``n`` and ``m > n``.
    """
    try:
        jsonschema.validate(data, _load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"instance schema violation at {where}: {exc.message}") from None
    n = data["n"]
    centers = data["centers"]
    if any(len(c) != n for c in centers) or len(data["c0"]) != n:
        raise ValidationError(f"all points must have length n={n}")
    if len(centers) <= n:
        raise ValidationError(f"need more centers than dimensions (m={len(centers)}, n={n})")
    return Instance.from_arrays(centers, data["r"], data["c0"], label=data.get("label"))


def load_instance(path) -> Instance:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc.msg} (line {exc.lineno})") from None
    return instance_from_dict(data)


def instance_to_dict(inst: Instance):
    out = {
        "schema": INSTANCE_SCHEMA,
        "n": inst.n,
        "r": inst.system.radius,
        "centers": inst.system.centers,
        "c0": inst.c0,
    }
    if inst.label is not None:
        out["label"] = inst.label
    return out


def _float(x):
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    # keep floats recognisable as floats
    if not any(ch in s for ch in ".eEn"):
        s += ".0"
    return s


def _encode(obj, indent, level):
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," if indent else ", "
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # numeric vectors stay on one line
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, 0, 0) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2) -> str:
    """JSON text with 17-significant-digit floats."""
    return _encode(obj, indent, 0)


def strip_timing(data):
    """Copy of a parsed report without wall-time fields."""
    if isinstance(data, dict):
        return {k: strip_timing(v) for k, v in data.items() if k != "wall_time_s"}
    if isinstance(data, list):
        return [strip_timing(v) for v in data]
    return data


def solve_report_dict(rep):
    """Plain-data view of a :class:`~ballmax.solver.SolveReport` (indices 1-based)."""
    return {
        "case": rep.case,
        "rstar": rep.rstar,
        "maximizers": [np.asarray(x) for x in rep.maximizers],
        "multiplicity": rep.multiplicity,
        "certificates": [
            {"residuals": c.residuals, "active": [k + 1 for k in c.active]} for c in rep.certificates
        ],
        "sigma": [k + 1 for k in rep.support],
        "alpha": rep.alpha,
        "rbar": rep.rbar,
        "interior_contact": rep.interior_contact,
        "inclusion_verified": rep.inclusion_verified,
        "uniqueness": rep.uniqueness,
        "notes": list(rep.notes),
    }
