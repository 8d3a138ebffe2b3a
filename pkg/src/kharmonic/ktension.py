"""Euler-Lagrange fields of the order-k energies and the circle families.

Two evaluation paths are provided for the k-tension.  The general path
assembles the field from the derivative stack and the target's abstract
curvature operator, so it is valid on products.  The constant-curvature
path expands every curvature operator with the scalar substitution
R(V, W)Z = K(<W,Z>V - <Z,V>W).  The two are algebraically identical
rearrangements of one formula and agree to round-off; the general path
is canonical.

Sign conventions, fixed once here and relied on everywhere else:

* even order k = 2s:
    tau_k = -Lap^(2s-1) tau + R(Lap^(2s-2) tau, c') c'
            + sum_{l=1}^{s-1} [ R(D Lap^(s+l-2) tau, Lap^(s-l-1) tau) c'
                              - R(Lap^(s+l-2) tau, D Lap^(s-l-1) tau) c' ]
* odd order k = 2s+1: same leading pattern one order higher, plus the
  extra closing term R(D Lap^(s-1) tau, Lap^(s-1) tau) c',
with Lap^(-1) = 0, so order 1 gives minus the tension.

On a constant-curvature surface, constant-curvature circles solve
tau_k = 0 exactly when kappa^2 = (2s-1)K (even) or kappa^2 = 2sK (odd);
`constant_curvature_kappa` returns those family values and
`circle_curve` constructs the circles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve import (DiscreteCurve, TangentField, build_stack, l2_inner,
                    tension, velocity, _cov, _diff)
from .errors import (NotASphere, NotASpaceForm, NotUnitSphere, StencilTooCoarse,
                     ValidationError, WrongDimension)
from .spaceform import PI, SpaceForm

__all__ = [
    "KTensionResult", "MAX_ORDER",
    "tension_k", "tension_k_general", "tension_k_spaceform",
    "constant_curvature_kappa", "circle_curve", "kappa_profile",
    "frenet_residual_3", "constant_kappa_normal_residual_3",
    "extrinsic_residual_3",
]

# stencil error compounds roughly like h^2 * 4^k; beyond this order double
# precision is unreliable at desk-scale N
MAX_ORDER = 6


@dataclass(frozen=True)
class KTensionResult:
    field: TangentField
    l2_norm: float
    inf_norm: float
    k: int
    path: str


def _wrap_result(curve: DiscreteCurve, arr: np.ndarray, k: int, path: str) -> KTensionResult:
    field = TangentField(curve, arr)
    l2 = float(np.sqrt(curve.h * np.sum(arr * arr)))
    inf = float(np.max(np.linalg.norm(arr.astype(np.float64), axis=1)))
    return KTensionResult(field=field, l2_norm=l2, inf_norm=inf, k=k, path=path)


def _validate_order(curve: DiscreteCurve, k: int) -> None:
    if not 1 <= k <= MAX_ORDER:
        raise ValidationError(f"k must satisfy 1 <= k <= {MAX_ORDER}")
    curve.require_closed("tension_k")
    curve.require_headroom(k, "tension_k")


def tension_k_general(curve: DiscreteCurve, k: int) -> KTensionResult:
    """Order-k tension via the abstract curvature operator (valid on products)."""
    _validate_order(curve, k)
    s = k // 2
    stack = build_stack(curve, k - 1)
    L = [f.vectors for f in stack.lap_tau]
    G = [f.vectors for f in stack.grad_lap_tau]
    v = velocity(curve).vectors
    R = curve.space.curvature_op
    p = curve.points
    if k % 2 == 0:
        out = -L[2 * s - 1] + R(p, L[2 * s - 2], v, v)
        for l in range(1, s):
            out = out + R(p, G[s + l - 2], L[s - l - 1], v)
            out = out - R(p, L[s + l - 2], G[s - l - 1], v)
    else:
        out = -L[2 * s]
        if 2 * s - 1 >= 0:
            out = out + R(p, L[2 * s - 1], v, v)
        for l in range(1, s):
            out = out + R(p, G[s + l - 1], L[s - l - 1], v)
            out = out - R(p, L[s + l - 1], G[s - l - 1], v)
        if s >= 1:
            out = out + R(p, G[s - 1], L[s - 1], v)
    return _wrap_result(curve, out, k, "general")


def tension_k_spaceform(curve: DiscreteCurve, k: int) -> KTensionResult:
    """Order-k tension with the scalar-curvature substitution expanded.

    Written in terms of the iterated second derivative A_t = (DD)^t tau
    = (-1)^t Lap^t tau and B_t = D A_t.  The discrete <c', c'> is kept
    (not replaced by 1) so the result agrees with the general path to
    round-off.  The closing odd-order bracket carries the factor K that
    the substitution produces.
    """
    if curve.space.kind not in ("sphere", "flat"):
        raise NotASpaceForm("constant-curvature path needs a sphere or flat target")
    _validate_order(curve, k)
    s = k // 2
    K = curve.space.curvature
    stack = build_stack(curve, k - 1)
    A = [(-1.0) ** t * f.vectors for t, f in enumerate(stack.lap_tau)]
    B = [(-1.0) ** t * f.vectors for t, f in enumerate(stack.grad_lap_tau)]
    v = velocity(curve).vectors

    def dot(a, b):
        return np.sum(a * b, axis=-1, keepdims=True)

    gdot = dot(v, v)
    if k % 2 == 0:
        out = A[2 * s - 1] + K * (gdot * A[2 * s - 2] - dot(v, A[2 * s - 2]) * v)
        for l in range(1, s):
            out = out - K * (dot(A[s - l - 1], v) * B[s + l - 2]
                             - dot(v, B[s + l - 2]) * A[s - l - 1]
                             - dot(B[s - l - 1], v) * A[s + l - 2]
                             + dot(v, A[s + l - 2]) * B[s - l - 1])
    else:
        out = -A[2 * s]
        if 2 * s - 1 >= 0:
            out = out - K * (gdot * A[2 * s - 1] - dot(v, A[2 * s - 1]) * v)
        for l in range(1, s):
            out = out + K * (dot(A[s - l - 1], v) * B[s + l - 1]
                             - dot(v, B[s + l - 1]) * A[s - l - 1]
                             - dot(B[s - l - 1], v) * A[s + l - 1]
                             + dot(v, A[s + l - 1]) * B[s - l - 1])
        if s >= 1:
            out = out + K * (dot(A[s - 1], v) * B[s - 1] - dot(v, B[s - 1]) * A[s - 1])
    return _wrap_result(curve, out, k, "spaceform")


def tension_k(curve: DiscreteCurve, k: int, path: str = "general") -> KTensionResult:
    if path == "general":
        return tension_k_general(curve, k)
    if path == "spaceform":
        return tension_k_spaceform(curve, k)
    raise ValidationError(f"unknown tension path {path!r}")


# -- circle families -----------------------------------------------------------

def constant_curvature_kappa(k: int, K: float):
    """Geodesic curvature of the constant-curvature circle solving tau_k = 0.

    Even k = 2s gives sqrt((2s-1)K), odd k = 2s+1 gives sqrt(2sK).
    Order 1 returns 0 (geodesics).  On flat targets (K = 0) with k > 1
    the family degenerates to geodesics only, signalled by None.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    if K < 0:
        raise ValidationError("K must be >= 0")
    if k == 1:
        return 0.0
    if K == 0.0:
        return None
    s = k // 2
    return float(np.sqrt((2 * s - 1) * K)) if k % 2 == 0 else float(np.sqrt(2 * s * K))


def circle_curve(space: SpaceForm, kappa: float, n: int,
                 dtype=np.float64) -> DiscreteCurve:
    """Uniformly sampled circle of geodesic curvature kappa on a sphere.

    The circle sits at height z0 = r*kappa/sqrt(K + kappa^2) along the
    last ambient axis; kappa = 0 gives the equatorial great circle.
    ``dtype=np.longdouble`` samples and carries the curve in extended
    precision, which matters when high-order tensions are evaluated at
    fine resolution (iterated stencils amplify coordinate rounding).
    """
    if space.kind != "sphere":
        raise NotASphere("circle construction needs a sphere target")
    if space.intrinsic_dim < 2:
        raise NotASphere("circle construction needs intrinsic dimension >= 2")
    if n < 32:
        raise ValidationError("circle sampling needs n >= 32")
    if kappa < 0:
        raise ValidationError("kappa must be >= 0")
    if dtype == np.longdouble:
        pi = PI
        r = np.longdouble(space.radius)
        K = np.longdouble(1) / (r * r)
        kappa = np.longdouble(kappa)
    else:
        pi = np.pi
        r = dtype(space.radius)
        K = dtype(space.curvature)
        kappa = dtype(kappa)
    z0 = r * kappa / np.sqrt(K + kappa * kappa)
    rho = np.sqrt(r * r - z0 * z0)
    ang = (2 * pi / n) * np.arange(n, dtype=dtype)
    pts = np.zeros((n, space.ambient_dim), dtype=dtype)
    pts[:, 0] = rho * np.cos(ang)
    pts[:, 1] = rho * np.sin(ang)
    pts[:, -1] = z0
    h = 2 * pi * rho / n
    return DiscreteCurve(space, pts, closed=True, h=h)


def kappa_profile(curve: DiscreteCurve) -> np.ndarray:
    """Signed geodesic curvature per sample on an oriented surface target.

    The sign comes from pairing the tension with the 90-degree rotation
    of the unit velocity inside the oriented tangent plane; reversing the
    traversal flips it.
    """
    sp = curve.space
    if sp.intrinsic_dim != 2 or sp.kind not in ("sphere", "flat"):
        raise WrongDimension("kappa_profile needs a 2-dimensional sphere or plane")
    curve.require_closed("kappa_profile")
    v = velocity(curve).vectors
    speed = np.linalg.norm(v, axis=-1, keepdims=True)
    unit = v / np.maximum(speed, 1e-300)
    if sp.kind == "sphere":
        normal = np.cross(curve.points / sp.radius, unit)
    else:
        normal = np.stack([-unit[:, 1], unit[:, 0]], axis=1)
    tau = tension(curve).vectors
    return np.sum(tau * normal, axis=-1)


# -- order-3 residuals ----------------------------------------------------------

def frenet_residual_3(kappa: np.ndarray, h: float, K: float):
    """Normal and tangential order-3 balance of a closed curvature profile.

    Evaluates the printed coefficients verbatim,

        normal:  k'''' - 12 (k')^2 - 10 k^2 k'' + k^5 - 3 k (k')^2
                 + K (k'' - 2 k^3)
        tangent: k k''' - 2 k^3 k' + 2 k' k''

    with derivatives by iterated periodic central differences.  No term
    is corrected here even where the mixed differential weights look
    suspect; cross-checking against the general and extrinsic routes is
    the caller's job (see the `ode3` verification suite).
    """
    kappa = np.asarray(kappa, dtype=float)
    if kappa.ndim != 1:
        raise ValidationError("kappa profile must be one-dimensional")
    if kappa.shape[0] < 64:
        raise StencilTooCoarse("frenet_residual_3 needs at least 64 samples")

    def d(f):
        return (np.roll(f, -1) - np.roll(f, 1)) / (2 * h)

    k1 = d(kappa)
    k2 = d(k1)
    k3 = d(k2)
    k4 = d(k3)
    normal = (k4 - 12.0 * k1**2 - 10.0 * kappa**2 * k2 + kappa**5
              - 3.0 * kappa * k1**2 + K * (k2 - 2.0 * kappa**3))
    tangent = kappa * k3 - 2.0 * kappa**3 * k1 + 2.0 * k1 * k2
    return normal, tangent


def constant_kappa_normal_residual_3(kappa: float, K: float) -> float:
    """Constant-profile reduction of the order-3 normal balance: k^5 - 2K k^3."""
    return float(kappa**5 - 2.0 * K * kappa**3)


def extrinsic_residual_3(curve: DiscreteCurve) -> np.ndarray:
    """Sixth-order extrinsic balance for unit-speed curves on the unit sphere.

    Evaluates, per sample and with g_ij the ambient dot of the i-th and
    j-th parameter derivatives,

        -c^(6) - 2 c^(4) - (2 g13 + 3) c'' + 4 g23 c'
        + (9 g24 + 8 g33 - 4 g13 - 3) c

    using periodic central differences of orders one through six.  The
    result is an ambient-vector residual (not generally tangent); it is
    the order-3 tension written in ambient derivatives and vanishes to
    stencil order exactly on order-3-critical curves.  (The position
    coefficient is fully reduced with the unit-speed identities
    g13 = -g22, g14 = -3 g23, g15 = -3 g33 - 4 g24; partially reduced
    variants found in the literature fail on non-geodesic circles.)
    """
    sp = curve.space
    if sp.kind != "sphere" or abs(sp.radius - 1.0) > 1e-12:
        raise NotUnitSphere("extrinsic residual is derived for the unit sphere")
    curve.require_closed("extrinsic_residual_3")
    if curve.n < 128:
        raise StencilTooCoarse("extrinsic_residual_3 needs N >= 128")
    d = [np.asarray(curve.points)]
    for _ in range(6):
        d.append(_diff(curve, d[-1]))

    def g(i, j):
        return np.sum(d[i] * d[j], axis=-1, keepdims=True)

    return (-d[6] - 2.0 * d[4] - (2.0 * g(1, 3) + 3.0) * d[2]
            + 4.0 * g(2, 3) * d[1]
            + (9.0 * g(2, 4) + 8.0 * g(3, 3) - 4.0 * g(1, 3) - 3.0) * d[0])
