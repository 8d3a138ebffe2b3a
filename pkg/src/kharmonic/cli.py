"""Command-line surface: curve I/O, residuals, flows, spectra, verification.

Exit codes: 0 success, 1 numerical failure (tolerance breach or a
numerical precondition such as a too-coarse stencil), 2 usage/validation
(bad file, bad flag, out-of-range order).  All commands are
deterministic given their inputs and ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from .curve import l2_inner, rough_laplacian, build_stack, covariant_derivative
from .energy import energy_k, first_variation_check, flow_to_critical
from .errors import (DomainMismatch, KHarmonicError, LengthMismatch, NotASphere,
                     NotASpaceForm, NotCriticalWarning, NotUnitSphere,
                     ValidationError, WrongDimension)
from .ktension import (MAX_ORDER, circle_curve, constant_curvature_kappa,
                       constant_kappa_normal_residual_3, extrinsic_residual_3,
                       frenet_residual_3, kappa_profile, tension_k)
from .product import graph_curve, product_curve, split_tension_check
from .serialization import dump_curve, load_curve
from .spaceform import flat, sphere
from .testing import fourier_tangent_field, random_loop, random_tangent_field
from .variation import hessian_matrix, index_nullity, nullity_characterization_check

_USAGE_ERRORS = (ValidationError, NotASpaceForm, NotASphere, NotUnitSphere,
                 WrongDimension, LengthMismatch, DomainMismatch)


# -- helpers -------------------------------------------------------------------

def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _measured_kappa(curve) -> float:
    prof = kappa_profile(curve)
    return float(np.mean(np.abs(prof)))


# -- subcommands ---------------------------------------------------------------

def _cmd_residual(args) -> int:
    curve = load_curve(args.curve)
    res = tension_k(curve, args.k, path=args.path)
    _emit({"k": res.k, "l2": res.l2_norm, "inf": res.inf_norm, "path": res.path},
          args.out)
    return 0


def _cmd_circle(args) -> int:
    if (args.kappa is None) == (args.family is None):
        raise ValidationError("give exactly one of --kappa or --family")
    if args.curvature <= 0:
        raise ValidationError("--curvature must be positive")
    space = sphere(args.dim, radius=1.0 / float(np.sqrt(args.curvature)))
    if args.family is not None:
        kappa = constant_curvature_kappa(args.family, args.curvature)
        if kappa is None:
            raise ValidationError("no constant-curvature family value for this (k, K)")
    else:
        kappa = args.kappa
    curve = circle_curve(space, kappa, args.n)
    dump_curve(curve, args.out)
    sys.stdout.write(f"wrote {args.out}: kappa = {kappa!r}, measured "
                     f"{_measured_kappa(curve)!r}\n")
    return 0


def _cmd_flow(args) -> int:
    curve = load_curve(args.curve)
    final, trace = flow_to_critical(curve, args.k, eta0=args.eta0, tol=args.tol,
                                    max_iters=args.max_iters)
    dump_curve(final, args.out)
    with open(args.trace, "w") as fh:
        fh.write(trace.to_csv())
    res = tension_k(final, args.k)
    sys.stdout.write(json.dumps({
        "terminal": trace.terminal,
        "iterations": len(trace.rows),
        "energy": energy_k(final, args.k),
        "residual_inf": res.inf_norm,
    }) + "\n")
    return 0 if trace.terminal == "Converged" else 1


def _cmd_spectrum(args) -> int:
    curve = load_curve(args.curve)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NotCriticalWarning)
        H, _ = hessian_matrix(curve, args.k, mode=args.mode)
        report = index_nullity(H, epsilon=args.epsilon, k=args.k)
    payload = report.to_dict()
    if any(issubclass(w.category, NotCriticalWarning) for w in caught):
        payload["not_critical"] = True
    _emit(payload, args.out)
    return 0


def _cmd_plot(args) -> int:
    svg = _render_plot(args.input)
    with open(args.out, "w") as fh:
        fh.write(svg)
    sys.stdout.write(f"wrote {args.out}\n")
    return 0


def _cmd_verify(args) -> int:
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    if any(name not in SUITES for name in names):
        raise ValidationError(f"unknown suite {args.suite!r}; "
                              f"choose from {', '.join(sorted(SUITES))} or 'all'")
    failed = False
    for name in names:
        ok, lines = SUITES[name](args.seed)
        status = "PASS" if ok else "FAIL"
        sys.stdout.write(f"{name}: {status}\n")
        for line in lines:
            sys.stdout.write(f"  {line}\n")
        failed = failed or not ok
    return 1 if failed else 0


# -- plotting ------------------------------------------------------------------

def _render_plot(path: str) -> str:
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = None
    if isinstance(data, dict) and "points" in data:
        pts = np.asarray(data["points"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] < 2:
            raise ValidationError("curve file needs at least two coordinates")
        xy = pts[:, :2]
        return _polyline_svg(xy[:, 0], xy[:, 1], close=bool(data.get("closed", True)))
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if lines and lines[0].strip() == "iter,energy,residual_inf,step":
        rows = [ln.split(",") for ln in lines[1:]]
        if not rows:
            raise ValidationError("trace has no rows to plot")
        its = np.array([float(r[0]) for r in rows])
        energy = np.array([max(float(r[1]), 1e-300) for r in rows])
        return _polyline_svg(its, np.log10(energy), close=False)
    raise ValidationError("input is neither a curve file nor a flow trace")


def _polyline_svg(x: np.ndarray, y: np.ndarray, close: bool) -> str:
    w, hgt, pad = 400.0, 400.0, 20.0
    xmin, xmax = float(np.min(x)), float(np.max(x))
    ymin, ymax = float(np.min(y)), float(np.max(y))
    sx = (w - 2 * pad) / max(xmax - xmin, 1e-12)
    sy = (hgt - 2 * pad) / max(ymax - ymin, 1e-12)
    px = pad + (x - xmin) * sx
    py = hgt - pad - (y - ymin) * sy
    d = "M " + " L ".join(f"{a:.3f},{b:.3f}" for a, b in zip(px, py))
    if close:
        d += " Z"
    return ('<svg xmlns="http://www.w3.org/2000/svg" '
            f'width="{w:.0f}" height="{hgt:.0f}" viewBox="0 0 {w:.0f} {hgt:.0f}">\n'
            f'  <path d="{d}" fill="none" stroke="black" stroke-width="1"/>\n'
            "</svg>\n")


# -- verification suites ---------------------------------------------------------

def _suite_sbp(seed: int):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        c = random_loop(int(rng.integers(48, 97)), rng)
        f = random_tangent_field(c, rng)
        g = random_tangent_field(c, rng)
        lhs = l2_inner(c, rough_laplacian(c, f), g)
        rhs = l2_inner(c, covariant_derivative(c, f), covariant_derivative(c, g))
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    return worst <= 1e-12, [f"max relative deviation {worst:.3e} (bound 1e-12)"]


def _suite_kernel_chain(seed: int):
    from .variation import node_frames, _operator_matrix
    from .curve import _cov, _lap
    # fixture with a clean nontrivial kernel: the uniform great circle; a
    # consistent pair of thresholds (tau for D, tau^2 for its adjoint square)
    # makes the rank comparison exact
    c = circle_curve(sphere(2), 0.0, 64)
    frames = node_frames(c)
    M_cov = _operator_matrix(c, frames, lambda w: _cov(c, w))
    M_lap = _operator_matrix(c, frames, lambda w: _lap(c, w))
    sv_cov = np.linalg.svd(M_cov, compute_uv=False)
    sv_lap = np.linalg.svd(M_lap, compute_uv=False)
    dim_cov = int(np.sum(sv_cov <= 1e-8 * sv_cov[0]))
    dim_lap = int(np.sum(sv_lap <= 1e-8 * sv_lap[0]))
    rng = np.random.default_rng(seed)
    cw = random_loop(64, rng)
    stack = build_stack(cw, 3)
    worst = 0.0
    for l in (1, 2, 3):
        lhs = l2_inner(cw, stack.lap_tau[l], stack.lap_tau[l - 1])
        rhs = l2_inner(cw, stack.grad_lap_tau[l - 1], stack.grad_lap_tau[l - 1])
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    ok = (dim_cov == dim_lap) and worst <= 1e-12
    return ok, [f"dim ker(D) = {dim_cov}, dim ker(Lap) = {dim_lap}",
                f"chain identity max relative deviation {worst:.3e} (bound 1e-12)"]


def _suite_first_variation(seed: int):
    lines = []
    ok = True
    c = circle_curve(sphere(2), 1.0, 256)
    for k in (1, 2, 3):
        worst_rel, worst_abs = 0.0, 0.0
        for s in range(5):
            rng = np.random.default_rng(seed * 1000 + 10 * s + k)
            V = fourier_tangent_field(c, rng)
            analytic, numeric, rel = first_variation_check(c, k, V)
            worst_rel = max(worst_rel, rel)
            worst_abs = max(worst_abs, abs(analytic - numeric))
        if k == 2:
            # the unit-curvature circle is exactly order-2 critical: both
            # sides vanish, so agreement is absolute, not relative
            ok = ok and worst_abs <= 1e-6
            lines.append(f"k=2 (critical fixture): max |analytic - numeric| "
                         f"= {worst_abs:.3e} (bound 1e-6)")
        else:
            ok = ok and worst_rel <= 1e-2
            lines.append(f"k={k}: max rel err = {worst_rel:.3e} (bound 1e-2)")
    return ok, lines


def _suite_product(seed: int):
    # extended-precision fixtures: the splitting is exact at any precision,
    # but the graph's first-block bound sits below float64 stencil noise
    from .curve import DiscreteCurve
    sp_half = sphere(2, radius=1.0 / np.sqrt(2.0))
    psi = circle_curve(sphere(2), 1.0, 128, dtype=np.longdouble)
    geo = circle_curve(sp_half, 0.0, 128, dtype=np.longdouble)  # same length as psi
    # share psi's parameter step bit-for-bit so the splitting comparison runs
    # identical floating-point arithmetic on both routes
    geo = DiscreteCurve(geo.space, geo.points, closed=True, h=psi.h)
    const = DiscreteConstant(flat(2), psi)
    worst = 0.0
    for k in (1, 2, 3, 4):
        worst = max(worst, split_tension_check(geo, psi, k))
        worst = max(worst, split_tension_check(const, psi, k))
    prod = product_curve(geo, psi)
    e_add = 0.0
    for k in (1, 2, 3):
        lhs = energy_k(prod, k)
        rhs = energy_k(geo, k) + energy_k(psi, k)
        e_add = max(e_add, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    # properness propagation: harmonic x proper-2-critical
    t1 = tension_k(prod, 1).inf_norm
    t2 = tension_k(prod, 2).inf_norm
    proper = (t1 > 0.5) and (t2 <= 1e-6)
    circ = sphere(1, radius=psi.n * float(psi.h) / (2 * np.pi))
    graph = graph_curve(psi, circ)
    g2 = tension_k(graph, 2)
    first_block = float(np.max(np.abs(g2.field.vectors[:, :2].astype(np.float64))))
    ok = worst <= 1e-12 and e_add <= 1e-12 and proper and first_block <= 1e-12
    return ok, [f"max splitting deviation {worst:.3e} (bound 1e-12)",
                f"energy additivity relative deviation {e_add:.3e} (bound 1e-12)",
                f"properness: |tau| = {t1:.3f} > 0.5 and |tau_2| = {t2:.2e} <= 1e-6",
                f"graph first-block |tau_2| = {first_block:.3e} (bound 1e-12)"]


def DiscreteConstant(space, like):
    """Constant curve (a point) over the same discrete domain as ``like``."""
    from .curve import DiscreteCurve
    pts = np.zeros((like.n, space.ambient_dim))
    return DiscreteCurve(space, pts, closed=like.closed, h=like.h)


def _suite_ode3(seed: int):
    lines = []
    K = 1.0
    kap3 = constant_curvature_kappa(3, K)
    c = circle_curve(sphere(2), kap3, 512)
    alg = constant_kappa_normal_residual_3(kap3, K)
    res3 = tension_k(c, 3).inf_norm
    ext = float(np.max(np.linalg.norm(extrinsic_residual_3(c), axis=1)))
    prof = kappa_profile(c)
    normal, tangent = frenet_residual_3(prof, float(c.h), K)
    lines.append(f"family circle: algebraic normal residual {alg:.3e} (bound 1e-12)")
    lines.append(f"family circle: |tau_3|_inf = {res3:.3e}, extrinsic |res|_inf = {ext:.3e}")
    lines.append(f"family circle: profile residual sup (normal, tangent) = "
                 f"({float(np.max(np.abs(normal))):.3e}, {float(np.max(np.abs(tangent))):.3e})")
    c1 = circle_curve(sphere(2), 1.0, 512)
    alg1 = constant_kappa_normal_residual_3(1.0, K)
    res31 = tension_k(c1, 3).inf_norm
    consistent = abs(alg1 + 1.0) <= 1e-12 and res31 >= 0.5
    lines.append(f"unit circle: algebraic normal residual {alg1:+.3f} and "
                 f"|tau_3|_inf = {res31:.3f} -> "
                 f"{'CONSISTENT' if consistent else 'INCONSISTENT'} "
                 "(both flag the curve as not order-3 critical)")
    ok = abs(alg) <= 1e-12 and res3 <= 1e-2 and ext <= 5e-2 and consistent
    return ok, lines


def _suite_hessian_oracle(seed: int):
    c = circle_curve(sphere(2), 1.0, 128)
    Hj, asym = hessian_matrix(c, 2, mode="jacobi")
    Hf, _ = hessian_matrix(c, 2, mode="fd")
    rel = float(np.linalg.norm(Hj - Hf, 2) / np.linalg.norm(Hf, 2))
    ok = rel <= 1e-2 and asym <= 1e-2
    return ok, [f"fd vs operator relative distance {rel:.3e} (bound 1e-2)",
                f"operator-mode asymmetry {asym:.3e} (bound 1e-2)"]


SUITES = {
    "first-variation": _suite_first_variation,
    "hessian-oracle": _suite_hessian_oracle,
    "kernel-chain": _suite_kernel_chain,
    "ode3": _suite_ode3,
    "product": _suite_product,
    "sbp": _suite_sbp,
}


# -- entry point -----------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="kharmonic",
                                  description="polyharmonic curve laboratory")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("residual", help="order-k tension norms of a curve file")
    p.add_argument("curve")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--path", choices=("general", "spaceform"), default="general")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_residual)

    p = sub.add_parser("circle", help="construct a constant-curvature circle file")
    p.add_argument("--curvature", "-K", type=float, default=1.0,
                   help="sectional curvature K of the sphere target")
    p.add_argument("--kappa", type=float)
    p.add_argument("--family", type=int,
                   help="use the order-k family value for kappa")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_circle)

    p = sub.add_parser("flow", help="descend the order-k energy to a critical curve")
    p.add_argument("curve")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eta0", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iters", type=int, default=200_000)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", required=True)
    p.set_defaults(fn=_cmd_flow)

    p = sub.add_parser("spectrum", help="Hessian spectrum with index/nullity")
    p.add_argument("curve")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mode", choices=("fd", "jacobi"), default="jacobi")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_spectrum)

    p = sub.add_parser("verify", help="run a named verification suite (or 'all')")
    p.add_argument("suite")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("plot", help="render a curve file or flow trace to SVG")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_plot)
    return top


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _USAGE_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except KHarmonicError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
