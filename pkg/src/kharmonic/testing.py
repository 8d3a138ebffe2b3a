"""Seeded random fixtures shared by the verification suites and the tests."""

from __future__ import annotations

import numpy as np

from .curve import DiscreteCurve, TangentField
from .spaceform import SpaceForm, sphere

__all__ = ["random_loop", "random_tangent_field", "fourier_tangent_field"]


def random_loop(n: int, rng: np.random.Generator, wobble: float = 0.12,
                space: SpaceForm | None = None) -> DiscreteCurve:
    """Smooth random closed loop on a sphere: a tilted circle plus a few
    low-frequency harmonics, projected back to the target."""
    space = sphere(2) if space is None else space
    t = 2 * np.pi * np.arange(n) / n
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    base = np.outer(np.cos(t), q[:, 0]) + np.outer(np.sin(t), q[:, 1])
    for m in (2, 3):
        base += (wobble / (m * m)) * (np.outer(np.cos(m * t), rng.standard_normal(3))
                                      + np.outer(np.sin(m * t), rng.standard_normal(3)))
    pts = space.project_point(base)
    gaps = space.geodesic_distance(pts, np.roll(pts, -1, axis=0))
    return DiscreteCurve(space, pts, closed=True, h=float(np.sum(gaps)) / n)


def fourier_tangent_field(curve: DiscreteCurve, rng: np.random.Generator,
                          max_mode: int = 3) -> TangentField:
    """Band-limited random field: the same continuum field at any resolution."""
    n, d = curve.points.shape
    t = 2 * np.pi * np.arange(n) / n
    vals = np.zeros((n, d))
    for m in range(max_mode + 1):
        vals += (np.outer(np.cos(m * t), rng.standard_normal(d))
                 + np.outer(np.sin(m * t), rng.standard_normal(d))) / (1.0 + m * m)
    return TangentField(curve, curve.space.project_tangent(curve.points, vals))


def random_tangent_field(curve: DiscreteCurve, rng: np.random.Generator) -> TangentField:
    """White-noise tangent field (rough; fine for exact identities)."""
    vals = rng.standard_normal(curve.points.shape)
    return TangentField(curve, curve.space.project_tangent(curve.points, vals))
