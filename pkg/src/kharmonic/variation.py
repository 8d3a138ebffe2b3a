"""Second variation: the order-k stability operator, spectra, index and nullity.

The stability operator is assembled as the linearization of the order-k
tension at the given curve, term group by term group, on targets with
parallel curvature (spheres, flat space, and their products); on such
targets every derivative-of-curvature contribution vanishes identically
and is dropped at the type level rather than evaluated.  The
linearization of the iterated-Laplacian tower follows the two
commutation rules

    d/dr Lap(w)      = Lap(d/dr w) - D(R(W, c') w) - R(W, c') Dw
    d/dr D(w)        = D(d/dr w) + R(W, c') w

seeded with  d/dr tau = -Lap W + R(W, c') c', where W is the variation
field, c' the velocity, D the covariant derivative along the curve and
Lap the rough Laplacian.  Summed l-ranges track the tension assembly
with Lap^(-1) = 0, so order 1 gives  Lap W - R(W, c') c'  (minus the
classical geodesic stability operator).

At a harmonic curve all tension-carrying couplings drop and the operator
collapses to a power of  L(W) = -Lap W + R(W, c') c':  order 2 is L o L,
order 3 is L o Lap o L, which is what the nullity characterization check
exploits.

A finite-difference Hessian of the energy serves as the independent
oracle: the two routes are never merged, and their agreement (and the
operator's near-symmetry) is what the verification suite measures.
The Hessian is certified only at numerically critical curves; elsewhere
it is still computed but flagged with `NotCriticalWarning`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .curve import (DiscreteCurve, TangentField, build_stack, tension,
                    velocity, _cov, _lap)
from .energy import energy_k, residual_scale, _perturbed
from .errors import (NotCriticalWarning, NotHarmonic, NotParallelCurvature,
                     StencilTooCoarse, ValidationError)
from .ktension import tension_k_general

__all__ = ["SpectrumReport", "jacobi_apply", "hessian_fd", "hessian_matrix",
           "index_nullity", "nullity_characterization_check", "node_frames"]

MAX_VARIATION_ORDER = 4
_CRITICAL_TOL = 1e-3
_HARMONIC_TOL = 1e-3


@dataclass(frozen=True)
class SpectrumReport:
    """Sorted Hessian eigenvalues with index/nullity counts."""

    eigenvalues: np.ndarray
    index: int
    nullity: int
    epsilon: float
    basis_dim: int
    k: int

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "epsilon": self.epsilon,
            "index": self.index,
            "nullity": self.nullity,
            "eigenvalues": [float(x) for x in self.eigenvalues],
        }


def _require_variation_ready(curve: DiscreteCurve, k: int) -> None:
    if not 1 <= k <= MAX_VARIATION_ORDER:
        raise ValidationError(f"second variation supports 1 <= k <= {MAX_VARIATION_ORDER}")
    if not curve.space.has_parallel_curvature:
        raise NotParallelCurvature("second variation needs a parallel-curvature target")
    curve.require_closed("jacobi_apply")
    if curve.n < 16 * (k + 1):
        raise StencilTooCoarse(f"second variation at order {k} needs N >= {16 * (k + 1)}")


def _linearized_tower(curve: DiscreteCurve, W: np.ndarray, depth: int):
    """First variation of the iterated-Laplacian tower in direction W."""
    stack = build_stack(curve, depth)
    L = [f.vectors for f in stack.lap_tau]
    G = [f.vectors for f in stack.grad_lap_tau]
    v = velocity(curve).vectors
    R = curve.space.curvature_op
    p = curve.points
    dlap = [-_lap(curve, W) + R(p, W, v, v)]
    dgrad = [_cov(curve, dlap[0]) + R(p, W, v, L[0])]
    for t in range(1, depth + 1):
        coupled = R(p, W, v, L[t - 1])
        dlap.append(_lap(curve, dlap[t - 1]) - _cov(curve, coupled) - R(p, W, v, G[t - 1]))
        dgrad.append(_cov(curve, dlap[t]) + R(p, W, v, L[t]))
    return L, G, dlap, dgrad


def jacobi_apply(curve: DiscreteCurve, k: int, W: TangentField) -> TangentField:
    """Apply the order-k stability operator to the field W."""
    _require_variation_ready(curve, k)
    if not W.attached_to(curve):
        raise ValidationError("field must be attached to the curve")
    s = k // 2
    L, G, dlap, dgrad = _linearized_tower(curve, W.vectors, k - 1)
    v = velocity(curve).vectors
    dW = _cov(curve, W.vectors)
    R = curve.space.curvature_op
    p = curve.points
    if k % 2 == 0:
        out = -dlap[2 * s - 1]
        out = out + (R(p, dlap[2 * s - 2], v, v) + R(p, L[2 * s - 2], dW, v)
                     + R(p, L[2 * s - 2], v, dW))
        for l in range(1, s):
            out = out + (R(p, dgrad[s + l - 2], L[s - l - 1], v)
                         + R(p, G[s + l - 2], dlap[s - l - 1], v)
                         + R(p, G[s + l - 2], L[s - l - 1], dW))
            out = out - (R(p, dlap[s + l - 2], G[s - l - 1], v)
                         + R(p, L[s + l - 2], dgrad[s - l - 1], v)
                         + R(p, L[s + l - 2], G[s - l - 1], dW))
    else:
        out = -dlap[2 * s]
        if 2 * s - 1 >= 0:
            out = out + (R(p, dlap[2 * s - 1], v, v) + R(p, L[2 * s - 1], dW, v)
                         + R(p, L[2 * s - 1], v, dW))
        for l in range(1, s):
            out = out + (R(p, dgrad[s + l - 1], L[s - l - 1], v)
                         + R(p, G[s + l - 1], dlap[s - l - 1], v)
                         + R(p, G[s + l - 1], L[s - l - 1], dW))
            out = out - (R(p, dlap[s + l - 1], G[s - l - 1], v)
                         + R(p, L[s + l - 1], dgrad[s - l - 1], v)
                         + R(p, L[s + l - 1], G[s - l - 1], dW))
        if s >= 1:
            out = out + (R(p, dgrad[s - 1], L[s - 1], v)
                         + R(p, G[s - 1], dlap[s - 1], v)
                         + R(p, G[s - 1], L[s - 1], dW))
    return TangentField(curve, out)


def _warn_if_not_critical(curve: DiscreteCurve, k: int) -> bool:
    res = tension_k_general(curve, k)
    critical = res.inf_norm <= _CRITICAL_TOL * residual_scale(curve, k)
    if not critical:
        warnings.warn(
            f"curve is not order-{k} critical (|tau_{k}|_inf = {res.inf_norm:.2e}); "
            "Hessian values are diagnostic only", NotCriticalWarning, stacklevel=3)
    return critical


def hessian_fd(curve: DiscreteCurve, k: int, V: TangentField, W: TangentField,
               step: float = 1e-3) -> float:
    """Mixed central difference of E_k along exp(t V + r W); symmetric in (V, W)."""
    if not 1e-5 <= step <= 1e-2:
        raise ValidationError("step must lie in [1e-5, 1e-2]")
    if not (V.attached_to(curve) and W.attached_to(curve)):
        raise ValidationError("fields must be attached to the curve")
    _warn_if_not_critical(curve, k)
    return _hessian_fd_raw(curve, k, V.vectors, W.vectors, step)


def _hessian_fd_raw(curve: DiscreteCurve, k: int, V: np.ndarray, W: np.ndarray,
                    step: float) -> float:
    def e(t, r):
        return energy_k(_perturbed(curve, t * V + r * W), k)

    return (e(step, step) - e(step, -step) - e(-step, step) + e(-step, -step)) \
        / (4.0 * step * step)


def node_frames(curve: DiscreteCurve, basis_seed: Optional[int] = None) -> np.ndarray:
    """Per-node orthonormal tangent frames, shape (N, intrinsic_dim, d).

    With ``basis_seed`` the canonical frames are mixed by seeded random
    rotations; spectra must not depend on this choice.
    """
    m = curve.space.intrinsic_dim
    frames = np.zeros((curve.n, m, curve.space.ambient_dim))
    for i in range(curve.n):
        frames[i] = curve.space.tangent_basis(np.asarray(curve.points[i], dtype=float))
    if basis_seed is not None:
        rng = np.random.default_rng(basis_seed)
        for i in range(curve.n):
            q, _ = np.linalg.qr(rng.standard_normal((m, m)))
            frames[i] = q @ frames[i]
    return frames


def _operator_matrix(curve: DiscreteCurve, frames: np.ndarray, apply_fn) -> np.ndarray:
    """Matrix of a field operator in the per-node frame coordinates."""
    n, m, d = frames.shape
    dim = n * m
    out = np.empty((dim, dim))
    for b in range(dim):
        i, a = divmod(b, m)
        w = np.zeros((n, d))
        w[i] = frames[i, a]
        y = apply_fn(w)
        out[:, b] = np.einsum("nid,nd->ni", frames, y).reshape(-1)
    return out


def hessian_matrix(curve: DiscreteCurve, k: int, mode: str = "jacobi",
                   step: float = 1e-3, basis_seed: Optional[int] = None
                   ) -> Tuple[np.ndarray, float]:
    """Dense Hessian of E_k in per-node orthonormal tangent frames.

    ``jacobi`` mode pairs basis fields with the stability operator and
    reports the relative asymmetry before symmetrizing; ``fd`` mode fills
    the entries with mixed finite differences (symmetric by construction).
    Returns ``(matrix, asymmetry)``.
    """
    _require_variation_ready(curve, k)
    frames = node_frames(curve, basis_seed)
    n, m, _ = frames.shape
    dim = n * m
    if mode == "jacobi":
        _warn_if_not_critical(curve, k)

        def apply_fn(w):
            return jacobi_apply(curve, k, TangentField(curve, w)).vectors

        H = float(curve.h) * _operator_matrix(curve, frames, apply_fn)
        asym = float(np.linalg.norm(H - H.T, 2) / max(np.linalg.norm(H, 2), 1e-300))
        return 0.5 * (H + H.T), asym
    if mode == "fd":
        _warn_if_not_critical(curve, k)
        fields = []
        for b in range(dim):
            i, a = divmod(b, m)
            w = np.zeros((n, frames.shape[2]))
            w[i] = frames[i, a]
            fields.append(w)
        H = np.empty((dim, dim))
        for a in range(dim):
            for b in range(a, dim):
                val = _hessian_fd_raw(curve, k, fields[a], fields[b], step)
                H[a, b] = H[b, a] = val
        return H, 0.0
    raise ValidationError(f"unknown hessian mode {mode!r}")


def index_nullity(H: np.ndarray, epsilon: Optional[float] = None,
                  k: int = 0) -> SpectrumReport:
    """Eigenvalue counts of a symmetric matrix: index (< -eps), nullity (|.| <= eps).

    ``epsilon`` defaults to 1e-6 times the largest absolute eigenvalue
    and is recorded in the report; discrete null modes are not exactly
    zero, so an unreported threshold would make nullity unreproducible.
    """
    H = np.asarray(H, dtype=float)
    H = 0.5 * (H + H.T)
    evals = np.linalg.eigvalsh(H)
    scale = float(np.max(np.abs(evals))) if evals.size else 0.0
    eps = 1e-6 * scale if epsilon is None else float(epsilon)
    index = int(np.sum(evals < -eps))
    nullity = int(np.sum(np.abs(evals) <= eps))
    report = SpectrumReport(eigenvalues=evals, index=index, nullity=nullity,
                            epsilon=eps, basis_dim=evals.size, k=k)
    assert report.index + report.nullity + int(np.sum(evals > eps)) == report.basis_dim
    return report


def _numerical_kernel_dim(M: np.ndarray, rel_eps: float) -> int:
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0:
        return 0
    return int(np.sum(sv <= rel_eps * sv[0]))


def nullity_characterization_check(curve: DiscreteCurve, k: int,
                                   rel_eps: float = 1e-6) -> Tuple[int, int]:
    """Kernel dimensions of the order-k operator versus the harmonic composite.

    At a harmonic curve the order-k operator factors through the order-1
    operator J and the rough Laplacian as J o Lap^(k-2) o J; both kernel
    dimensions are returned for comparison (singular values <= rel_eps
    times the largest count as zero).
    """
    if k < 2:
        raise ValidationError("nullity characterization needs k >= 2")
    _require_variation_ready(curve, k)
    res = tension(curve)
    tau_inf = float(np.max(np.linalg.norm(res.vectors, axis=1)))
    if tau_inf > _HARMONIC_TOL * residual_scale(curve, 1):
        raise NotHarmonic(f"curve is not numerically harmonic (|tau|_inf = {tau_inf:.2e})")
    frames = node_frames(curve)

    def apply_k(w):
        return jacobi_apply(curve, k, TangentField(curve, w)).vectors

    def apply_1(w):
        return jacobi_apply(curve, 1, TangentField(curve, w)).vectors

    def apply_lap(w):
        return _lap(curve, w)

    Mk = _operator_matrix(curve, frames, apply_k)
    M1 = _operator_matrix(curve, frames, apply_1)
    Mlap = _operator_matrix(curve, frames, apply_lap)
    composite = M1 @ np.linalg.matrix_power(Mlap, k - 2) @ M1
    return (_numerical_kernel_dim(Mk, rel_eps),
            _numerical_kernel_dim(composite, rel_eps))
