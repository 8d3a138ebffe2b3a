"""Discrete curves and the first-order covariant calculus along them.

A curve is N samples on a target with a uniform parameter step h.  The
covariant derivative along the curve is the periodic central difference
followed by tangent projection.  The central-difference matrix is
exactly antisymmetric on a periodic grid and the projection is a
symmetric idempotent, so the composed operator is exactly skew-adjoint
between tangent fields under the rectangle-rule pairing.  The rough
Laplacian built as minus the operator applied twice is therefore its own
exact adjoint square: summation-by-parts identities hold to round-off,
not merely to stencil order.

Curves and fields are immutable snapshots.  Anything derived from a
curve (velocity, tension, the derivative stack) is cached on that
snapshot and recomputed from scratch on any new snapshot, so a stale
field can never be silently combined with a moved curve; identity is
checked on every pairing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import (DegenerateCurve, FieldCurveMismatch, OpenCurveUnsupported,
                     StencilTooCoarse, ValidationError)
from .spaceform import SpaceForm

__all__ = [
    "DiscreteCurve", "TangentField", "DerivativeStack",
    "velocity", "covariant_derivative", "tension", "rough_laplacian",
    "l2_inner", "resample_arclength", "build_stack",
]

MIN_POINTS = 16
STENCIL_HEADROOM = 16            # N >= 16*k for an order-k operation
_MEMBERSHIP_TOL = 1e-9
_TANGENCY_TOL = 1e-10


class DiscreteCurve:
    """N uniformly parametrized samples of a curve on a space form.

    Parameters
    ----------
    space : SpaceForm
    points : (N, d) array, one sample per row, on the target.
    closed : bool
        Closed curves wrap periodically; open curves are second-class
        (one-sided stencils for the velocity only).
    h : float
        Uniform parameter step between consecutive samples.
    """

    def __init__(self, space: SpaceForm, points: np.ndarray, closed: bool, h: float):
        points = np.array(points, copy=True)
        if points.ndim != 2 or points.shape[1] != space.ambient_dim:
            raise ValidationError("points must have shape (N, ambient_dim)")
        if points.shape[0] < MIN_POINTS:
            raise ValidationError(f"point count >= {MIN_POINTS} required")
        if not h > 0:
            raise ValidationError("parameter step h must be positive")
        defect = float(np.max(space.membership_defect(points)))
        if defect > _MEMBERSHIP_TOL:
            raise ValidationError(f"points are off the target (defect {defect:.2e})")
        points.setflags(write=False)
        self.space = space
        self.points = points
        self.closed = bool(closed)
        self.h = h
        self._cache: dict = {}

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def length(self) -> float:
        """Arc length estimate.

        The single-gap geodesic polyline undershoots the smooth length at
        second order; for closed curves the double-gap polyline undershoots
        four times as much, so the Richardson combination (4 L1 - L2) / 3
        is fourth-order accurate.  Open curves use the plain polyline.
        """
        if "length" not in self._cache:
            if self.closed:
                self._cache["length"] = _closed_length(self.space, self.points)
            else:
                self._cache["length"] = float(np.sum(self._gaps()))
        return self._cache["length"]

    def _gaps(self) -> np.ndarray:
        nxt = np.roll(self.points, -1, axis=0)
        g = self.space.geodesic_distance(self.points, nxt)
        return g if self.closed else g[:-1]

    def require_closed(self, what: str) -> None:
        if not self.closed:
            raise OpenCurveUnsupported(f"{what} requires a closed curve")

    def require_headroom(self, level: int, what: str) -> None:
        if self.n < STENCIL_HEADROOM * level:
            raise StencilTooCoarse(
                f"{what} at level {level} needs N >= {STENCIL_HEADROOM * level}, got {self.n}")

    def __repr__(self):
        return (f"DiscreteCurve(space={self.space.kind}, n={self.n}, "
                f"closed={self.closed}, h={float(self.h):.6g})")


class TangentField:
    """One tangent vector per curve sample; tied to its curve snapshot."""

    def __init__(self, curve: DiscreteCurve, vectors: np.ndarray):
        vectors = np.array(vectors, copy=True)
        if vectors.shape != curve.points.shape:
            raise ValidationError("field shape must match the curve's points")
        _check_tangency(curve, vectors)
        vectors.setflags(write=False)
        self.curve = curve
        self.vectors = vectors

    def attached_to(self, curve: DiscreteCurve) -> bool:
        return self.curve is curve


def _check_tangency(curve: DiscreteCurve, vectors: np.ndarray) -> None:
    # relative per-row bound plus an absolute floor: fields assembled from
    # O(1) intermediates can cancel to round-off, leaving a radial residue
    # at machine noise of the intermediate scale, not of the field scale
    sp = curve.space
    if sp.kind == "flat":
        return
    if sp.kind == "sphere":
        r = sp.radius
        sup = float(np.max(np.linalg.norm(vectors.astype(np.float64), axis=-1), initial=0.0))
        floor = 1e-12 * r * (1.0 + sup)
        inner = np.abs(np.sum(vectors * curve.points, axis=-1))
        bound = _TANGENCY_TOL * r * np.linalg.norm(vectors, axis=-1) + floor
        if np.any(inner > bound):
            raise ValidationError("field is not tangent to the curve's target")
        return
    # product: projection must leave the field unchanged
    proj = sp.project_tangent(curve.points, vectors)
    scale = float(np.linalg.norm(vectors.astype(np.float64)))
    if np.linalg.norm(proj - vectors) > _TANGENCY_TOL * scale + 1e-12 * (1.0 + scale):
        raise ValidationError("field is not tangent to the curve's target")


def _require_attached(curve: DiscreteCurve, field: TangentField) -> None:
    if not isinstance(field, TangentField) or not field.attached_to(curve):
        raise FieldCurveMismatch("field belongs to a different curve snapshot")


def _closed_length(space: SpaceForm, points: np.ndarray) -> float:
    l1 = float(np.sum(space.geodesic_distance(points, np.roll(points, -1, axis=0))))
    l2 = 0.5 * float(np.sum(space.geodesic_distance(points, np.roll(points, -2, axis=0))))
    return (4.0 * l1 - l2) / 3.0


# -- raw array kernels -------------------------------------------------------

def _diff(curve: DiscreteCurve, values: np.ndarray) -> np.ndarray:
    """Central difference in the curve parameter; second-order one-sided ends
    for open curves."""
    h = curve.h
    if curve.closed:
        return (np.roll(values, -1, axis=0) - np.roll(values, 1, axis=0)) / (2 * h)
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2 * h)
    out[0] = (-3 * values[0] + 4 * values[1] - values[2]) / (2 * h)
    out[-1] = (3 * values[-1] - 4 * values[-2] + values[-3]) / (2 * h)
    return out


def _cov(curve: DiscreteCurve, values: np.ndarray) -> np.ndarray:
    return curve.space.project_tangent(curve.points, _diff(curve, values))


def _lap(curve: DiscreteCurve, values: np.ndarray) -> np.ndarray:
    # adjoint square of the implemented first-derivative operator; on tangent
    # fields the exact adjoint is minus the operator itself
    return -_cov(curve, _cov(curve, values))


def _vel_arr(curve: DiscreteCurve) -> np.ndarray:
    if "vel" not in curve._cache:
        curve._cache["vel"] = _cov(curve, curve.points)
    return curve._cache["vel"]


def _tau_arr(curve: DiscreteCurve) -> np.ndarray:
    if "tau" not in curve._cache:
        curve._cache["tau"] = _cov(curve, _vel_arr(curve))
    return curve._cache["tau"]


# -- public operators ---------------------------------------------------------

def velocity(curve: DiscreteCurve) -> TangentField:
    """First derivative of the sample positions, projected tangent."""
    if "vel_field" not in curve._cache:
        curve._cache["vel_field"] = TangentField(curve, _vel_arr(curve))
    return curve._cache["vel_field"]


def covariant_derivative(curve: DiscreteCurve, field: TangentField) -> TangentField:
    """Covariant derivative of a field along the curve parameter."""
    _require_attached(curve, field)
    return TangentField(curve, _cov(curve, field.vectors))


def tension(curve: DiscreteCurve) -> TangentField:
    """Covariant acceleration; vanishes exactly on discrete geodesics."""
    if "tau_field" not in curve._cache:
        curve._cache["tau_field"] = TangentField(curve, _tau_arr(curve))
    return curve._cache["tau_field"]


def rough_laplacian(curve: DiscreteCurve, field: TangentField) -> TangentField:
    """Connection Laplacian, the exact discrete adjoint square of the
    covariant derivative (closed curves only)."""
    curve.require_closed("rough_laplacian")
    _require_attached(curve, field)
    return TangentField(curve, _lap(curve, field.vectors))


def l2_inner(curve: DiscreteCurve, f: TangentField, g: TangentField) -> float:
    """Rectangle-rule pairing sum_i <f_i, g_i> h."""
    _require_attached(curve, f)
    _require_attached(curve, g)
    return float(curve.h * np.sum(f.vectors * g.vectors))


@dataclass(frozen=True)
class DerivativeStack:
    """Cached tower of iterated Laplacians of the tension and their
    derivatives along the curve; entry 0 of ``lap_tau`` is the tension."""

    curve: DiscreteCurve
    depth: int
    tau: TangentField
    lap_tau: Tuple[TangentField, ...]
    grad_lap_tau: Tuple[TangentField, ...]


def build_stack(curve: DiscreteCurve, depth: int) -> DerivativeStack:
    """Iterated-Laplacian tower of the tension down to the given depth.

    Entries are shared: repeated calls on one snapshot extend a single
    cached tower rather than recomputing it.
    """
    curve.require_closed("build_stack")
    if depth < 0:
        raise ValidationError("stack depth must be >= 0")
    curve.require_headroom(depth + 1, "build_stack")
    lap_list, grad_list = curve._cache.setdefault("stack_raw", ([], []))
    if not lap_list:
        lap_list.append(_tau_arr(curve))
        grad_list.append(_cov(curve, lap_list[0]))
    while len(lap_list) <= depth:
        lap_list.append(_lap(curve, lap_list[-1]))
        grad_list.append(_cov(curve, lap_list[-1]))
    fields = curve._cache.setdefault("stack_fields", {})
    for t in range(depth + 1):
        if t not in fields:
            fields[t] = (TangentField(curve, lap_list[t]),
                         TangentField(curve, grad_list[t]))
    lap = tuple(fields[t][0] for t in range(depth + 1))
    grad = tuple(fields[t][1] for t in range(depth + 1))
    return DerivativeStack(curve=curve, depth=depth, tau=lap[0],
                           lap_tau=lap, grad_lap_tau=grad)


# -- resampling ---------------------------------------------------------------

_UNIFORM_TOL = 1e-7       # target relative gap deviation, below the 1e-6 contract
_SHORTCUT_TOL = 1e-8      # already-uniform snapshots are returned untouched
_MAX_PASSES = 64


def resample_arclength(curve: DiscreteCurve) -> DiscreteCurve:
    """Redistribute the samples to uniform geodesic spacing.

    The geometric image is preserved (points stay on the geodesic
    polyline through the old samples); N is preserved and h becomes
    length/N.  An already-uniform curve is returned unchanged.
    """
    curve.require_closed("resample_arclength")
    gaps = curve._gaps()
    total = float(np.sum(gaps))
    if total < 1e-8:
        raise DegenerateCurve(f"curve length {total:.2e} below resampling floor")
    dev = float(np.max(np.abs(gaps - total / curve.n))) / (total / curve.n)
    if dev <= _SHORTCUT_TOL:
        # spacing already uniform: points stay put, but h must still track
        # the current length (a uniform normal push changes every gap)
        h_new = _closed_length(curve.space, curve.points) / curve.n
        if abs(float(curve.h) - h_new) <= 1e-14 * float(curve.h):
            return curve
        return DiscreteCurve(curve.space, curve.points, closed=True, h=h_new)

    points = curve.points
    sp = curve.space
    n = curve.n
    for _ in range(_MAX_PASSES):
        cum = np.concatenate([[0.0], np.cumsum(gaps)])
        total = float(cum[-1])
        targets = total * np.arange(n) / n
        seg = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, n - 1)
        local = (targets - cum[seg]) / np.maximum(gaps[seg], 1e-300)
        nxt = np.roll(points, -1, axis=0)
        points = sp.geodesic_interpolate(points[seg], nxt[seg], local)
        gaps = sp.geodesic_distance(points, np.roll(points, -1, axis=0))
        total = float(np.sum(gaps))
        dev = float(np.max(np.abs(gaps - total / n))) / (total / n)
        if dev <= _UNIFORM_TOL:
            break
    else:
        raise DegenerateCurve(
            f"resampling failed to reach uniform spacing (residual {dev:.2e})")
    return DiscreteCurve(sp, points, closed=True, h=_closed_length(sp, points) / n)
