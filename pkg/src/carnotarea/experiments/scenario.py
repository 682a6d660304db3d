"""Scenario files: JSON documents describing one experiment.

Every object in the document has a fixed set of allowed keys; anything else is
rejected so that typos fail loudly instead of silently falling back to
defaults. Bracket triples use 1-based basis indices, as in the usual
mathematical notation; everything in code is 0-based.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .. import algebra, frame, maps
from ..algebra import CarnotAlgebra
from ..errors import CarnotError, ConfigError
from ..regions import CoordBox, D2Box, Region

SCHEMA_VERSION = 1
KINDS = ("area_verify", "zero_set", "lat_rate", "jac_equiv", "measure_est", "validate")

_TOP_KEYS = {"schema_version", "id", "kind", "seed", "group", "frame", "map", "region",
             "params", "output"}
_REQUIRED = {"schema_version", "id", "kind"}

# allowed params per kind, with defaults
_PARAMS: dict[str, dict[str, Any]] = {
    "area_verify": {"samples": 1_000_000, "image_delta": 1 / 32, "tolerance": 0.05,
                    "multiplicity": None},
    "zero_set": {"samples": 1_000_000, "deltas": [2.0 ** -k for k in range(3, 9)],
                 "reference_delta": 1 / 32, "min_slope": 2.5, "max_ratio": 1e-4},
    "lat_rate": {"base_point": None, "epsilons": [2.0 ** -k for k in range(2, 8)],
                 "pairs": 200, "min_slope": 1.4, "max_slope": None},
    "jac_equiv": {"point": None, "ts": [1.0, 0.5, 0.25], "samples": 1_000_000,
                  "tolerance": 0.02, "expected": None},
    "measure_est": {"delta": 1 / 64, "samples": 1_000_000, "tolerance": 0.10,
                    "volume_tolerance": 0.01},
    "validate": {"points": 64},
}

# sections each kind needs (True) or may carry (False)
_SECTIONS = {
    "area_verify": {"group": True, "map": True, "region": True},
    "zero_set": {"group": True, "map": True, "region": True},
    "lat_rate": {"frame": True},
    "jac_equiv": {"group": True, "map": True},
    "measure_est": {"group": True, "region": True},
    "validate": {"group": False, "frame": False},
}


@dataclass(frozen=True, eq=False)
class Scenario:
    id: str
    kind: str
    seed: int
    params: dict
    group: CarnotAlgebra | None = None
    frame: frame.FramedManifold | None = None
    map: maps.GroupMap | None = None
    region: Region | None = None
    output: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)


def _keys(obj, allowed, where, required=()):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = set(obj) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = set(required) - set(obj)
    if missing:
        raise ConfigError(f"{where}: missing field(s) {sorted(missing)}")
    return obj


def _vector(value, where, dim=None) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: not a numeric vector") from exc
    if arr.ndim != 1 or (dim is not None and arr.shape != (dim,)):
        raise ConfigError(f"{where}: expected a vector of length {dim}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{where}: non-finite entries")
    return arr


def _positive(value, where) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0 \
            or not math.isfinite(value):
        raise ConfigError(f"{where}: expected a positive number, got {value!r}")
    return float(value)


def _schedule(value, where) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where}: expected a nonempty list")
    out = [_positive(v, f"{where}[{i}]") for i, v in enumerate(value)]
    if any(b >= a for a, b in zip(out, out[1:])):
        raise ConfigError(f"{where}: schedule must be strictly decreasing")
    return out


def parse_group(spec, where="group") -> CarnotAlgebra:
    """``{"name": "heisenberg"}`` or ``{"layer_dims": [...], "brackets": [[i, j, k, c], ...]}``."""
    if isinstance(spec, dict) and "name" in spec:
        _keys(spec, {"name", "dim"}, where)
        name = spec["name"]
        if name == "abelian":
            if "dim" not in spec:
                raise ConfigError(f"{where}: abelian group needs 'dim'")
            dim = spec["dim"]
            if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
                raise ConfigError(f"{where}.dim: expected a positive integer")
            return algebra.abelian(dim)
        if "dim" in spec:
            raise ConfigError(f"{where}: 'dim' only applies to the abelian group")
        if name not in algebra.BUILTIN_ALGEBRAS:
            raise ConfigError(f"{where}: unknown group {name!r}; "
                              f"known: {sorted(algebra.BUILTIN_ALGEBRAS) + ['abelian']}")
        return algebra.BUILTIN_ALGEBRAS[name]()
    _keys(spec, {"layer_dims", "brackets"}, where, required={"layer_dims"})
    dims = spec["layer_dims"]
    if not isinstance(dims, list) or not all(isinstance(d, int) and d > 0 for d in dims):
        raise ConfigError(f"{where}.layer_dims: expected positive integers")
    triples = []
    for n, entry in enumerate(spec.get("brackets", [])):
        if not (isinstance(entry, list) and len(entry) == 4):
            raise ConfigError(f"{where}.brackets[{n}]: expected [i, j, k, value]")
        i, j, k, val = entry
        if not all(isinstance(v, int) and v >= 1 for v in (i, j, k)):
            raise ConfigError(f"{where}.brackets[{n}]: indices are 1-based integers")
        triples.append((i - 1, j - 1, k - 1, float(val)))
    return algebra.CarnotAlgebra.from_brackets(tuple(dims), triples)


def parse_frame(spec, where="frame") -> frame.FramedManifold:
    _keys(spec, {"name", "params"}, where, required={"name"})
    name = spec["name"]
    if name not in frame.BUILTIN_FRAMES:
        raise ConfigError(f"{where}: unknown frame {name!r}; known: {sorted(frame.BUILTIN_FRAMES)}")
    params = spec.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError(f"{where}.params: expected an object")
    try:
        return frame.BUILTIN_FRAMES[name](**params)
    except TypeError as exc:
        raise ConfigError(f"{where}.params: {exc}") from exc


def parse_box(spec, alg: CarnotAlgebra, where):
    """A d2-box ``{"center", "radius"}`` or a coordinate box ``{"lower", "upper"}``."""
    if isinstance(spec, dict) and ("lower" in spec or "upper" in spec):
        _keys(spec, {"lower", "upper"}, where, required={"lower", "upper"})
        return CoordBox(_vector(spec["lower"], f"{where}.lower", alg.dim),
                        _vector(spec["upper"], f"{where}.upper", alg.dim))
    _keys(spec, {"center", "radius"}, where, required={"radius"})
    center = _vector(spec.get("center", [0.0] * alg.dim), f"{where}.center", alg.dim)
    return D2Box(alg, center, _positive(spec["radius"], f"{where}.radius"))


def parse_region(spec, alg: CarnotAlgebra, where="region") -> Region:
    _keys(spec, {"pieces"}, where, required={"pieces"})
    pieces = spec["pieces"]
    if not isinstance(pieces, list) or not pieces:
        raise ConfigError(f"{where}.pieces: expected a nonempty list")
    return Region(tuple(parse_box(p, alg, f"{where}.pieces[{i}]") for i, p in enumerate(pieces)))


def parse_map(spec, alg: CarnotAlgebra, where="map") -> maps.GroupMap:
    """Recursive map catalog: identity, homomorphism, left_translate, dilate,
    compose, two_piece."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError(f"{where}: expected an object with a 'type'")
    kind = spec["type"]
    if kind == "identity":
        _keys(spec, {"type"}, where)
        return maps.identity(alg)
    if kind == "homomorphism":
        _keys(spec, {"type", "B1", "image_group"}, where, required={"B1"})
        im = parse_group(spec["image_group"], f"{where}.image_group") \
            if "image_group" in spec else alg
        try:
            b1 = np.asarray(spec["B1"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}.B1: not a numeric matrix") from exc
        return maps.Homomorphism.from_horizontal(alg, b1, im)
    if kind == "left_translate":
        _keys(spec, {"type", "g"}, where, required={"g"})
        return maps.LeftTranslation(alg, _vector(spec["g"], f"{where}.g", alg.dim))
    if kind == "dilate":
        _keys(spec, {"type", "r"}, where, required={"r"})
        return maps.Dilation(alg, _positive(spec["r"], f"{where}.r"))
    if kind == "compose":
        _keys(spec, {"type", "maps"}, where, required={"maps"})
        inner = spec["maps"]
        if not isinstance(inner, list) or not inner:
            raise ConfigError(f"{where}.maps: expected a nonempty list")
        # maps[0] is applied last; each map acts on the image of the next one
        built = []
        current = alg
        for i in range(len(inner) - 1, -1, -1):
            m = parse_map(inner[i], current, f"{where}.maps[{i}]")
            built.append(m)
            current = m.im_alg
        return maps.Composition(tuple(reversed(built)))
    if kind == "two_piece":
        _keys(spec, {"type", "map_a", "box_a", "map_b", "box_b"}, where,
              required={"map_a", "box_a", "map_b", "box_b"})
        return maps.TwoPiece(parse_map(spec["map_a"], alg, f"{where}.map_a"),
                             parse_box(spec["box_a"], alg, f"{where}.box_a"),
                             parse_map(spec["map_b"], alg, f"{where}.map_b"),
                             parse_box(spec["box_b"], alg, f"{where}.box_b"))
    raise ConfigError(f"{where}: unknown map type {kind!r}")


def _params(kind, given) -> dict:
    defaults = _PARAMS[kind]
    _keys(given, set(defaults), "params")
    out = dict(defaults)
    out.update(given)
    for key in ("deltas", "epsilons", "ts"):
        if key in out:
            out[key] = _schedule(out[key], f"params.{key}")
    for key in ("samples", "pairs", "points"):
        if key in out:
            v = out[key]
            if isinstance(v, float) and v.is_integer():
                v = int(v)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"params.{key}: expected a positive integer")
            out[key] = v
    for key in ("image_delta", "reference_delta", "tolerance", "delta", "volume_tolerance",
                "max_ratio"):
        if key in out:
            out[key] = _positive(out[key], f"params.{key}")
    return out


def from_dict(doc: dict) -> Scenario:
    """Validate a scenario document and resolve every catalog reference."""
    _keys(doc, _TOP_KEYS, "scenario", required=_REQUIRED)
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {doc['schema_version']!r}; "
                          f"this build reads {SCHEMA_VERSION}")
    sid = doc["id"]
    if not isinstance(sid, str) or not sid or any(c in sid for c in "/\\,\n"):
        raise ConfigError("id must be a nonempty string without separators or commas")
    kind = doc["kind"]
    if kind not in KINDS:
        raise ConfigError(f"unknown kind {kind!r}; known: {list(KINDS)}")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a nonnegative integer")

    sections = _SECTIONS[kind]
    for name in ("group", "frame", "map", "region"):
        if name in doc and name not in sections:
            raise ConfigError(f"kind {kind!r} takes no {name!r} section")
        if sections.get(name) and name not in doc:
            raise ConfigError(f"kind {kind!r} needs a {name!r} section")
    if kind == "validate" and not ({"group", "frame"} & set(doc)):
        raise ConfigError("validate needs a 'group' or a 'frame' section")

    output = _keys(doc.get("output", {}), {"csv", "svg"}, "output")
    for key, value in output.items():
        if not isinstance(value, str) or not value or "/" in value or "\\" in value:
            raise ConfigError(f"output.{key}: expected a plain file name")

    try:
        alg = parse_group(doc["group"]) if "group" in doc else None
        frm = parse_frame(doc["frame"]) if "frame" in doc else None
        phi = parse_map(doc["map"], alg) if "map" in doc else None
        region = parse_region(doc["region"], alg) if "region" in doc else None
        params = _params(kind, doc.get("params", {}))
    except ConfigError:
        raise
    except CarnotError as exc:
        # structural problems in the resolved objects are configuration errors too
        raise ConfigError(f"{type(exc).__name__}: {exc}") from exc

    if alg is not None and kind != "validate":
        report = algebra.validate_algebra(alg)
        if not report.passed:
            bad = [c.name for c in report.checks if not c.passed]
            raise ConfigError(f"group fails validation: {bad}; run a 'validate' scenario for detail")

    return Scenario(sid, kind, seed, params, alg, frm, phi, region, dict(output), doc)


def load(path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return from_dict(doc)
