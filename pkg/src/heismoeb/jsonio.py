"""JSON encodings of numbers, points, maps and metric models.

Wire formats::

    KNum           [c0, c1, ...]  or  "H:[c0,c1,c2,c3]"
    BoundaryPoint  {"zeta": [KNum, ...], "v": KNum}  or  {"inf": true}
    MoebiusMap     [{"dilate": 2.0}, {"translate": point}, {"invert": true},
                    {"conjugate": true}, {"rotate": [[KNum, ...], ...]},
                    {"rotate_quat": KNum}, {"rotate_oct": KNum}]
    MetricModel    {"kind": "koranyi_power", "alpha": 0.5, "beta": 2.0}
                   {"kind": "cc_h1", "gauge_norm": "default" | "scaled16"}
                   {"kind": "euclidean_r", "n": 3}
                   {"kind": "custom", "name": "weighted_koranyi", "weight": 0.25}
                   {"kind": "scaled", "c": 2.0, "model": {...}}

Non-finite floats are written as the strings "inf", "-inf" and "nan" so that
every document is strict JSON.
"""

from __future__ import annotations

import dataclasses
import json
import math
import re

import numpy as np

from .algebra import DIMS, KNum, check_field
from .heisenberg import INF, HPoint, is_inf
from . import metrics as M
from . import moebius as mb


class ParseError(ValueError):
    """Malformed JSON input."""


def _load(obj):
    if isinstance(obj, str):
        s = obj.strip()
        if s.startswith(("{", "[")):
            try:
                return json.loads(s)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}") from None
    return obj


_KNUM_TEXT = re.compile(r"^\s*([RCHO])\s*:\s*\[(.*)\]\s*$")


def parse_knum(obj, field: str) -> np.ndarray:
    d = DIMS[check_field(field)]
    if isinstance(obj, str):
        m = _KNUM_TEXT.match(obj)
        if not m:
            raise ParseError(f"bad KNum text {obj!r}")
        if m.group(1) != field:
            raise ParseError(f"KNum tagged {m.group(1)} where {field} was expected")
        try:
            coeffs = [float(c) for c in m.group(2).split(",") if c.strip()]
        except ValueError:
            raise ParseError(f"bad KNum coefficients in {obj!r}") from None
    elif isinstance(obj, (int, float)) and d == 1:
        coeffs = [float(obj)]
    elif isinstance(obj, (list, tuple)):
        try:
            coeffs = [float(c) for c in obj]
        except (TypeError, ValueError):
            raise ParseError(f"bad KNum coefficients {obj!r}") from None
    else:
        raise ParseError(f"cannot read a KNum from {obj!r}")
    if len(coeffs) != d:
        raise ParseError(f"{field} numbers have {d} coefficients, got {len(coeffs)}")
    return np.array(coeffs)


def knum_to_json(x) -> list:
    if isinstance(x, KNum):
        x = x.coeffs
    return [_num(c) for c in np.asarray(x).reshape(-1)]


def parse_point(obj, field: str, n: int | None = None):
    obj = _load(obj)
    if not isinstance(obj, dict):
        raise ParseError(f"a point must be a JSON object, got {obj!r}")
    if obj.get("inf") is True:
        return INF
    if "zeta" not in obj:
        raise ParseError("point object needs 'zeta' (or 'inf': true)")
    zeta = obj["zeta"]
    if not isinstance(zeta, list) or not zeta:
        raise ParseError("'zeta' must be a non-empty list of K-numbers")
    z = np.stack([parse_knum(c, field) for c in zeta])
    if n is not None and z.shape[0] != n - 1:
        raise ParseError(f"expected {n - 1} zeta entries for n={n}, got {z.shape[0]}")
    v = parse_knum(obj.get("v", [0.0] * DIMS[field]), field)
    if v[0] != 0.0:
        raise ParseError("the real coefficient of v must be 0")
    return HPoint(field, z, v)


def point_to_json(p):
    if is_inf(p):
        return {"inf": True}
    if p.batch_shape:
        return [point_to_json(p[i]) for i in range(len(p))]
    return {"zeta": [knum_to_json(c) for c in p.zeta], "v": knum_to_json(p.v)}


def parse_map(obj, field: str, n: int) -> mb.MoebiusMap:
    obj = _load(obj)
    if isinstance(obj, dict):
        obj = [obj]
    if not isinstance(obj, list):
        raise ParseError("a map must be a list of generator objects")
    gens = []
    for g in obj:
        if not isinstance(g, dict) or len(g) != 1:
            raise ParseError(f"each generator must be a one-key object, got {g!r}")
        (key, val), = g.items()
        try:
            if key == "dilate":
                gens.append(mb.Dilate(float(val)))
            elif key == "translate":
                p = parse_point(val, field, n)
                if is_inf(p):
                    raise ParseError("cannot translate by infinity")
                gens.append(mb.Translate(p))
            elif key == "invert" and val is True:
                gens.append(mb.Invert())
            elif key == "conjugate" and val is True:
                gens.append(mb.Conjugate())
            elif key == "rotate":
                u = np.array([[parse_knum(c, field) for c in row] for row in val])
                gens.append(mb.Rotate(u))
            elif key == "rotate_quat":
                gens.append(mb.RotateQuat(parse_knum(val, "H")))
            elif key == "rotate_oct":
                gens.append(mb.RotateOct(parse_knum(val, "O")))
            else:
                raise ParseError(f"unknown generator {key!r}")
        except ParseError:
            raise
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad {key} generator: {exc}") from None
    return mb.MoebiusMap(tuple(gens), field, n)


def generator_to_json(g):
    if isinstance(g, mb.Dilate):
        return {"dilate": g.delta}
    if isinstance(g, mb.Translate):
        return {"translate": point_to_json(g.by)}
    if isinstance(g, mb.Invert):
        return {"invert": True}
    if isinstance(g, mb.Conjugate):
        return {"conjugate": True}
    if isinstance(g, mb.Rotate):
        return {"rotate": [[knum_to_json(c) for c in row] for row in g.matrix]}
    if isinstance(g, mb.RotateQuat):
        return {"rotate_quat": knum_to_json(g.mu)}
    if isinstance(g, mb.RotateOct):
        return {"rotate_oct": knum_to_json(g.mu)}
    raise TypeError(f"not a generator: {g!r}")


def map_to_json(m: mb.MoebiusMap) -> list:
    return [generator_to_json(g) for g in m.word]


def parse_metric(obj) -> M.MetricModel:
    obj = _load(obj)
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParseError("a metric model must be an object with a 'kind'")
    kind = obj["kind"]
    try:
        if kind == "koranyi_power":
            return M.KoranyiPower(float(obj.get("alpha", 1.0)), float(obj.get("beta", 1.0)))
        if kind == "cc_h1":
            return M.CCH1(obj.get("gauge_norm", "default"))
        if kind == "euclidean_r":
            return M.EuclideanR(obj.get("n"))
        if kind == "custom":
            name = obj.get("name")
            if name not in M.CUSTOM_BUILDERS:
                raise ParseError(
                    f"unknown custom model {name!r}; known: {sorted(M.CUSTOM_BUILDERS)}"
                )
            return M.CUSTOM_BUILDERS[name](obj)
        if kind == "scaled":
            return M.Scaled(parse_metric(obj["model"]), float(obj["c"]))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad {kind} model: {exc}") from None
    raise ParseError(f"unknown metric kind {kind!r}")


def _num(x):
    x = float(x)
    if math.isfinite(x):
        return x + 0.0  # drops the sign of -0.0
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def to_jsonable(obj):
    """Recursively convert reports, points, maps and numpy values to JSON data."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if is_inf(obj) or isinstance(obj, HPoint):
        return point_to_json(obj)
    if isinstance(obj, mb.MoebiusMap):
        return map_to_json(obj)
    if isinstance(obj, M.MetricModel):
        return obj.to_json()
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False)
