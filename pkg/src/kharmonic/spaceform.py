"""Embedded constant-curvature targets and their pointwise operators.

Targets are realized extrinsically: a sphere of radius r sits in
R^(dim+1), flat space is its own ambient space, and a product
concatenates the ambient coordinates of its two factors.  Every
covariant operation used elsewhere reduces to "ambient derivative, then
orthogonal projection", so a target is fully described by four pointwise
maps: projection onto the target, projection onto a tangent space, the
curvature operator, and the geodesic exponential.

All maps accept a single vector of shape ``(d,)`` or a batch ``(n, d)``
and are pure; `SpaceForm` instances are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import ValidationError, ZeroVector

__all__ = ["SpaceForm", "sphere", "flat", "product_space"]

# pi to extended precision, for callers that sample curves in longdouble
PI = np.longdouble("3.14159265358979323846264338327950288420")

_ZERO_FLOOR = 1e-300
_EXP_ANGLE_FLOOR = 1e-14


def _dot(a, b):
    return np.sum(a * b, axis=-1, keepdims=True)


@dataclass(frozen=True)
class SpaceForm:
    """A constant-curvature target (or a product of two of them).

    ``curvature`` is the sectional curvature K for spheres and flat
    space; products carry ``None`` since K is not constant there.
    """

    kind: str
    intrinsic_dim: int
    ambient_dim: int
    curvature: Optional[float] = None
    radius: Optional[float] = None
    factors: Optional[Tuple["SpaceForm", "SpaceForm"]] = None

    def __post_init__(self):
        if self.kind == "sphere":
            if self.radius is None or not self.radius > 0:
                raise ValidationError("sphere radius must be positive")
            if self.curvature is None or abs(self.radius * np.sqrt(self.curvature) - 1.0) > 1e-12:
                raise ValidationError("sphere curvature must satisfy K = 1/r^2")
            if self.intrinsic_dim < 1 or self.ambient_dim != self.intrinsic_dim + 1:
                raise ValidationError("sphere of dimension d must sit in R^(d+1)")
        elif self.kind == "flat":
            if self.curvature != 0.0:
                raise ValidationError("flat space has K = 0")
            if self.intrinsic_dim < 1 or self.ambient_dim != self.intrinsic_dim:
                raise ValidationError("flat space is its own ambient space")
        elif self.kind == "product":
            if self.factors is None or len(self.factors) != 2:
                raise ValidationError("product needs exactly two factors")
            a, b = self.factors
            if self.intrinsic_dim != a.intrinsic_dim + b.intrinsic_dim:
                raise ValidationError("product intrinsic dim must be the sum of the factors'")
            if self.ambient_dim != a.ambient_dim + b.ambient_dim:
                raise ValidationError("product ambient dim must be the sum of the factors'")
        else:
            raise ValidationError(f"unknown space kind {self.kind!r}")

    # -- structure ---------------------------------------------------------

    @property
    def is_product(self) -> bool:
        return self.kind == "product"

    @property
    def has_parallel_curvature(self) -> bool:
        """Spheres, flat space, and their products all have parallel curvature."""
        if self.kind in ("sphere", "flat"):
            return True
        a, b = self.factors
        return a.has_parallel_curvature and b.has_parallel_curvature

    def _blocks(self, *arrays):
        """Split trailing axes of the given arrays at the factor boundary."""
        na = self.factors[0].ambient_dim
        out = []
        for arr in arrays:
            out.append((arr[..., :na], arr[..., na:]))
        return out

    # -- membership --------------------------------------------------------

    def membership_defect(self, x: np.ndarray) -> np.ndarray:
        """Relative distance of x from the target, per row (0 for flat)."""
        x = np.asarray(x)
        if self.kind == "flat":
            return np.zeros(x.shape[:-1], dtype=x.dtype)
        if self.kind == "sphere":
            return np.abs(np.linalg.norm(x, axis=-1) - self.radius) / self.radius
        (xa, xb), = self._blocks(x)
        return np.maximum(self.factors[0].membership_defect(xa),
                          self.factors[1].membership_defect(xb))

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        return bool(np.all(self.membership_defect(x) <= tol))

    # -- pointwise operators ------------------------------------------------

    def project_point(self, x: np.ndarray) -> np.ndarray:
        """Nearest-point (radial) projection onto the target."""
        x = np.asarray(x)
        if self.kind == "flat":
            return x
        if self.kind == "sphere":
            n = np.linalg.norm(x, axis=-1, keepdims=True)
            if np.any(n <= _ZERO_FLOOR):
                raise ZeroVector("cannot project a (near-)zero vector onto a sphere")
            return self.radius * x / n
        (xa, xb), = self._blocks(x)
        return np.concatenate([self.factors[0].project_point(xa),
                               self.factors[1].project_point(xb)], axis=-1)

    def project_tangent(self, p: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Orthogonal projection of v onto the tangent space at p."""
        p = np.asarray(p)
        v = np.asarray(v)
        if self.kind == "flat":
            return v
        if self.kind == "sphere":
            return v - (_dot(v, p) / self.radius**2) * p
        (pa, pb), (va, vb) = self._blocks(p, v)
        return np.concatenate([self.factors[0].project_tangent(pa, va),
                               self.factors[1].project_tangent(pb, vb)], axis=-1)

    def curvature_op(self, p: np.ndarray, V: np.ndarray, W: np.ndarray,
                     Z: np.ndarray) -> np.ndarray:
        """R(V, W)Z.  Constant-K targets use K(<W,Z>V - <Z,V>W); products act blockwise.

        Vanishes identically for one-dimensional factors (every tangent
        triple is collinear), so circles need no special casing.
        """
        if self.kind in ("sphere", "flat"):
            K = self.curvature
            if K == 0.0:
                return np.zeros_like(np.asarray(Z))
            return K * (_dot(W, Z) * V - _dot(Z, V) * W)
        (pa, pb), (Va, Vb), (Wa, Wb), (Za, Zb) = self._blocks(p, V, W, Z)
        return np.concatenate([self.factors[0].curvature_op(pa, Va, Wa, Za),
                               self.factors[1].curvature_op(pb, Vb, Wb, Zb)], axis=-1)

    def exp_map(self, p: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Geodesic exponential: follow the geodesic from p with initial velocity v."""
        p = np.asarray(p)
        v = np.asarray(v)
        if self.kind == "flat":
            return p + v
        if self.kind == "sphere":
            r = self.radius
            theta = np.linalg.norm(v, axis=-1, keepdims=True) / r
            safe = np.where(theta > 0, theta, 1.0)
            u = v / (safe * r)
            moved = np.cos(theta) * p + r * np.sin(theta) * u
            return np.where(theta > _EXP_ANGLE_FLOOR, moved, p)
        (pa, pb), (va, vb) = self._blocks(p, v)
        return np.concatenate([self.factors[0].exp_map(pa, va),
                               self.factors[1].exp_map(pb, vb)], axis=-1)

    # -- geodesic helpers (resampling support) -------------------------------

    def geodesic_distance(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        p = np.asarray(p)
        q = np.asarray(q)
        if self.kind == "flat":
            return np.linalg.norm(q - p, axis=-1)
        if self.kind == "sphere":
            c = np.clip(_dot(p, q)[..., 0] / self.radius**2, -1.0, 1.0)
            return self.radius * np.arccos(c)
        (pa, pb), (qa, qb) = self._blocks(p, q)
        da = self.factors[0].geodesic_distance(pa, qa)
        db = self.factors[1].geodesic_distance(pb, qb)
        return np.sqrt(da * da + db * db)

    def geodesic_interpolate(self, p: np.ndarray, q: np.ndarray,
                             t: np.ndarray) -> np.ndarray:
        """Point at parameter t in [0, 1] on the geodesic from p to q."""
        p = np.asarray(p)
        q = np.asarray(q)
        t = np.asarray(t)[..., None]
        if self.kind == "flat":
            return (1.0 - t) * p + t * q
        if self.kind == "sphere":
            r = self.radius
            c = np.clip(_dot(p, q) / r**2, -1.0, 1.0)
            ang = np.arccos(c)
            sin_ang = np.sin(ang)
            small = sin_ang < 1e-9
            safe = np.where(small, 1.0, sin_ang)
            out = (np.sin((1.0 - t) * ang) * p + np.sin(t * ang) * q) / safe
            lerp = (1.0 - t) * p + t * q
            out = np.where(small, lerp, out)
            n = np.linalg.norm(out, axis=-1, keepdims=True)
            return r * out / n
        (pa, pb), (qa, qb) = self._blocks(p, q)
        return np.concatenate([self.factors[0].geodesic_interpolate(pa, qa, t[..., 0]),
                               self.factors[1].geodesic_interpolate(pb, qb, t[..., 0])],
                              axis=-1)

    def tangent_basis(self, p: np.ndarray) -> np.ndarray:
        """Orthonormal tangent frame at a single point p, shape (intrinsic_dim, d).

        Built from the ambient axes in order: project, Gram-Schmidt, keep
        the first intrinsic_dim independent directions.
        """
        p = np.asarray(p, dtype=float)
        if self.kind == "flat":
            return np.eye(self.ambient_dim)
        if self.kind == "sphere":
            cols = []
            for a in range(self.ambient_dim):
                e = np.zeros(self.ambient_dim)
                e[a] = 1.0
                w = self.project_tangent(p, e)
                for c in cols:
                    w = w - np.dot(w, c) * c
                n = np.linalg.norm(w)
                if n > 1e-8:
                    cols.append(w / n)
                if len(cols) == self.intrinsic_dim:
                    break
            return np.array(cols)
        (pa, pb), = self._blocks(p)
        fa = self.factors[0].tangent_basis(pa)
        fb = self.factors[1].tangent_basis(pb)
        na, nb = self.factors[0].ambient_dim, self.factors[1].ambient_dim
        out = np.zeros((self.intrinsic_dim, self.ambient_dim))
        out[: fa.shape[0], :na] = fa
        out[fa.shape[0]:, na:] = fb
        return out


def sphere(dim: int, radius: float = 1.0) -> SpaceForm:
    """Round sphere S^dim of the given radius, K = 1/radius^2."""
    return SpaceForm(kind="sphere", intrinsic_dim=dim, ambient_dim=dim + 1,
                     curvature=1.0 / radius**2, radius=radius)


def flat(dim: int) -> SpaceForm:
    """Euclidean space R^dim, K = 0."""
    return SpaceForm(kind="flat", intrinsic_dim=dim, ambient_dim=dim, curvature=0.0)


def product_space(a: SpaceForm, b: SpaceForm) -> SpaceForm:
    """Riemannian product of two targets; ambient coordinates concatenate."""
    return SpaceForm(kind="product",
                     intrinsic_dim=a.intrinsic_dim + b.intrinsic_dim,
                     ambient_dim=a.ambient_dim + b.ambient_dim,
                     factors=(a, b))
