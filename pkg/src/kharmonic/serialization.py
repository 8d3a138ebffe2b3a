"""Curve-file JSON round-tripping.

The on-disk schema is ``{"space": {...}, "closed": bool, "points": [[...], ...]}``
with space descriptors ``{"kind": "sphere", "dim": d, "radius": r}``,
``{"kind": "flat", "dim": d}`` or ``{"kind": "product", "factors": [a, b]}``.
Floats are written with the shortest decimal form that round-trips in
binary64 (Python's repr), so save -> load -> save is byte-identical for
canonical files.  On load, points exactly on the target are kept
verbatim; points within 1e-9 relative are re-projected; anything further
off is rejected.
"""

from __future__ import annotations

import json

import numpy as np

from .curve import MIN_POINTS, DiscreteCurve
from .errors import ValidationError
from .spaceform import SpaceForm, flat, product_space, sphere

__all__ = ["space_to_dict", "space_from_dict", "curve_to_dict", "curve_from_dict",
           "dump_curve", "load_curve"]

_KEEP_TOL = 1e-12
_PROJECT_TOL = 1e-9


def space_to_dict(space: SpaceForm) -> dict:
    if space.kind == "sphere":
        return {"kind": "sphere", "dim": space.intrinsic_dim, "radius": float(space.radius)}
    if space.kind == "flat":
        return {"kind": "flat", "dim": space.intrinsic_dim}
    return {"kind": "product", "factors": [space_to_dict(f) for f in space.factors]}


def space_from_dict(data) -> SpaceForm:
    if not isinstance(data, dict) or "kind" not in data:
        raise ValidationError("space descriptor must be an object with a 'kind'")
    kind = data["kind"]
    if kind == "sphere":
        try:
            return sphere(int(data["dim"]), float(data.get("radius", 1.0)))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad sphere descriptor: {exc}")
    if kind == "flat":
        try:
            return flat(int(data["dim"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad flat descriptor: {exc}")
    if kind == "product":
        factors = data.get("factors")
        if not isinstance(factors, list) or len(factors) != 2:
            raise ValidationError("product descriptor needs exactly two factors")
        return product_space(space_from_dict(factors[0]), space_from_dict(factors[1]))
    raise ValidationError(f"unknown space kind {kind!r}")


def curve_to_dict(curve: DiscreteCurve) -> dict:
    return {
        "space": space_to_dict(curve.space),
        "closed": curve.closed,
        "points": [[float(x) for x in row] for row in np.asarray(curve.points, dtype=float)],
    }


def curve_from_dict(data) -> DiscreteCurve:
    if not isinstance(data, dict):
        raise ValidationError("curve file must contain a JSON object")
    for key in ("space", "closed", "points"):
        if key not in data:
            raise ValidationError(f"curve file is missing {key!r}")
    space = space_from_dict(data["space"])
    try:
        points = np.asarray(data["points"], dtype=float)
    except (TypeError, ValueError):
        raise ValidationError("points must be an array of coordinate arrays")
    if points.ndim != 2 or points.shape[1] != space.ambient_dim:
        raise ValidationError(
            f"points must be rows of length {space.ambient_dim} for this space")
    if points.shape[0] < MIN_POINTS:
        raise ValidationError(f"point count >= {MIN_POINTS} required")
    defect = space.membership_defect(points)
    worst = float(np.max(defect))
    if worst > _PROJECT_TOL:
        raise ValidationError(f"points are off the target (relative defect {worst:.2e})")
    if worst > _KEEP_TOL:
        points = space.project_point(points)
    closed = bool(data["closed"])
    gaps = space.geodesic_distance(points, np.roll(points, -1, axis=0))
    if not closed:
        gaps = gaps[:-1]
    total = float(np.sum(gaps))
    if total <= 0:
        raise ValidationError("curve has zero length")
    h = total / points.shape[0] if closed else total / (points.shape[0] - 1)
    return DiscreteCurve(space, points, closed=closed, h=h)


def dumps_curve(curve: DiscreteCurve) -> str:
    return json.dumps(curve_to_dict(curve), separators=(",", ":")) + "\n"


def dump_curve(curve: DiscreteCurve, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_curve(curve))


def load_curve(path: str) -> DiscreteCurve:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"not valid JSON: {exc}")
    return curve_from_dict(data)
