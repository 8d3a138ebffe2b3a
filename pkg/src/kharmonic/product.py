"""Curves into product targets: pairing, graphs, and the splitting identity.

All the discrete operators (projection, differencing, the curvature
operator) act blockwise on a product target, so the order-k tension of a
paired curve is exactly the concatenation of the factor tensions, at the
level of floating-point arithmetic and not merely to stencil order.
`split_tension_check` measures that deviation; its contract is
round-off.  The general tension path is used on purpose: a product of
spheres has no constant curvature, so the splitting is a genuine
identity between two different computations.

Note a paired curve is generally not unit speed even when both factors
are; the operators stay valid because they differentiate in the shared
domain parameter.
"""

from __future__ import annotations

import numpy as np

from .curve import DiscreteCurve
from .errors import DomainMismatch, LengthMismatch
from .ktension import tension_k_general
from .spaceform import PI, SpaceForm, product_space

__all__ = ["product_curve", "split_tension_check", "graph_curve"]


def _require_same_domain(c1: DiscreteCurve, c2: DiscreteCurve) -> None:
    if c1.n != c2.n or c1.closed != c2.closed:
        raise DomainMismatch("factor curves must share N and the closed flag")
    h1, h2 = float(c1.h), float(c2.h)
    if abs(h1 - h2) > 1e-12 * max(h1, h2):
        raise DomainMismatch(f"factor curves must share h (got {h1!r} vs {h2!r})")


def product_curve(c1: DiscreteCurve, c2: DiscreteCurve) -> DiscreteCurve:
    """Pair two curves over the same discrete domain into the product target."""
    _require_same_domain(c1, c2)
    space = product_space(c1.space, c2.space)
    points = np.concatenate([c1.points, c2.points], axis=1)
    return DiscreteCurve(space, points, closed=c1.closed, h=c1.h)


def split_tension_check(c1: DiscreteCurve, c2: DiscreteCurve, k: int) -> float:
    """Sup-norm deviation between the paired k-tension and the factor pair.

    Exactly zero up to round-off: every operator involved commutes with
    the block concatenation.
    """
    prod = product_curve(c1, c2)
    whole = tension_k_general(prod, k).field.vectors
    parts = np.concatenate([tension_k_general(c1, k).field.vectors,
                            tension_k_general(c2, k).field.vectors], axis=1)
    return float(np.max(np.linalg.norm(whole - parts, axis=1)))


def graph_curve(psi: DiscreteCurve, domain_circle: SpaceForm) -> DiscreteCurve:
    """Graph of a closed curve over its own parameter circle.

    The first block traverses ``domain_circle`` at unit speed (the
    identity map of the parameter circle, which is harmonic), so the
    graph's k-tension is supported entirely on the second block and the
    graph is a proper order-k critical curve exactly when psi is.
    """
    if domain_circle.kind != "sphere" or domain_circle.intrinsic_dim != 1:
        raise LengthMismatch("graph domain must be a circle (1-sphere)")
    psi.require_closed("graph_curve")
    circumference = 2.0 * np.pi * domain_circle.radius
    param_length = psi.n * float(psi.h)
    if abs(circumference - param_length) > 1e-9 * param_length:
        raise LengthMismatch(
            f"domain circumference {circumference!r} != parameter length {param_length!r}")
    dtype = psi.points.dtype
    r = dtype.type(domain_circle.radius)
    # exactly uniform angles: a seam between the last and first sample would
    # be amplified by the iterated stencils; the (at most one-ulp) deviation
    # of the traversal speed from 1 is harmless since any constant-speed
    # circle traversal is harmonic
    pi = PI if dtype == np.longdouble else dtype.type(np.pi)
    ang = (2 * pi / psi.n) * np.arange(psi.n, dtype=dtype)
    first = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
    space = product_space(domain_circle, psi.space)
    points = np.concatenate([first, psi.points], axis=1)
    return DiscreteCurve(space, points, closed=True, h=psi.h)
