import warnings

import numpy as np
import pytest

import kharmonic as kh
from kharmonic import (circle_curve, hessian_fd, hessian_matrix, index_nullity,
                       jacobi_apply, nullity_characterization_check,
                       rough_laplacian, sphere, velocity)
from kharmonic.errors import (NotCriticalWarning, NotHarmonic, StencilTooCoarse,
                              ValidationError)
from kharmonic.testing import fourier_tangent_field, random_tangent_field

from conftest import make_great_circle


def harmonic_operator(c, f):
    """L(W) = -Lap W + R(W, c')c', the first-order building block."""
    v = velocity(c).vectors
    out = -rough_laplacian(c, f).vectors + c.space.curvature_op(
        c.points, f.vectors, v, v)
    return kh.TangentField(c, out)


def test_jacobi_linearity_and_zero(s2, rng):
    c = make_great_circle(64, s2)
    z = kh.TangentField(c, np.zeros_like(c.points))
    np.testing.assert_allclose(jacobi_apply(c, 2, z).vectors, 0.0, atol=1e-14)
    f = random_tangent_field(c, rng)
    g = random_tangent_field(c, rng)
    comb = kh.TangentField(c, 0.7 * f.vectors - 1.3 * g.vectors)
    lhs = jacobi_apply(c, 3, comb).vectors
    rhs = 0.7 * jacobi_apply(c, 3, f).vectors - 1.3 * jacobi_apply(c, 3, g).vectors
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_jacobi_geodesic_factorizations(s2, rng):
    # at a harmonic curve the operator collapses to compositions of L;
    # these identities hold to round-off because the discrete tension of the
    # uniform great circle is exactly zero
    c = make_great_circle(64, s2)
    W = random_tangent_field(c, rng)
    LW = harmonic_operator(c, W)
    np.testing.assert_allclose(jacobi_apply(c, 1, W).vectors, -LW.vectors,
                               atol=1e-11)
    np.testing.assert_allclose(jacobi_apply(c, 2, W).vectors,
                               harmonic_operator(c, LW).vectors, atol=1e-9)
    lap_LW = rough_laplacian(c, LW)
    np.testing.assert_allclose(jacobi_apply(c, 3, W).vectors,
                               harmonic_operator(c, lap_LW).vectors, atol=1e-8)


def test_jacobi_quadratic_form_factorization(s2, rng):
    # order 2: <W, J W> equals |L W|^2; order 3: equals |D L W|^2
    c = make_great_circle(64, s2)
    W = fourier_tangent_field(c, rng)
    LW = harmonic_operator(c, W)
    q2 = kh.l2_inner(c, W, jacobi_apply(c, 2, W))
    assert q2 == pytest.approx(kh.l2_inner(c, LW, LW), rel=1e-9)
    dLW = kh.covariant_derivative(c, LW)
    q3 = kh.l2_inner(c, W, jacobi_apply(c, 3, W))
    assert q3 == pytest.approx(kh.l2_inner(c, dLW, dLW), rel=1e-9)


def test_jacobi_fd_pairing_oracle(s2, rng):
    # mixed finite differences of the energy against the operator pairing on
    # the order-2 critical circle
    c = circle_curve(s2, 1.0, 128)
    V = fourier_tangent_field(c, rng)
    W = fourier_tangent_field(c, rng)
    pairing = kh.l2_inner(c, V, jacobi_apply(c, 2, W))
    fd = hessian_fd(c, 2, V, W)
    assert fd == pytest.approx(pairing, rel=1e-2)


def test_jacobi_linearized_tower_fd_oracle(s2, rng):
    # the linearized tower must match finite differences of the stack itself
    c = circle_curve(s2, 1.0, 128)
    W = fourier_tangent_field(c, rng)
    eps = 1e-6
    from kharmonic.curve import build_stack
    from kharmonic.energy import _perturbed
    from kharmonic.variation import _linearized_tower
    _, _, dlap, _ = _linearized_tower(c, W.vectors, 1)
    for t in (0, 1):
        plus = build_stack(_perturbed(c, eps * W.vectors), t).lap_tau[t].vectors
        minus = build_stack(_perturbed(c, -eps * W.vectors), t).lap_tau[t].vectors
        fd = c.space.project_tangent(c.points, (plus - minus) / (2 * eps))
        scale = np.max(np.linalg.norm(dlap[t], axis=1))
        assert np.max(np.linalg.norm(fd - dlap[t], axis=1)) < 2e-2 * scale


def test_hessian_fd_symmetric_and_bilinear(s2, rng):
    c = circle_curve(s2, 1.0, 64)
    V = fourier_tangent_field(c, rng)
    W = fourier_tangent_field(c, rng)
    assert hessian_fd(c, 2, V, W) == hessian_fd(c, 2, W, V)
    z = kh.TangentField(c, np.zeros_like(c.points))
    assert hessian_fd(c, 2, z, W) == pytest.approx(0.0, abs=1e-8)


def test_hessian_fd_warns_off_critical(s2, rng):
    c = circle_curve(s2, 0.7, 64)
    V = fourier_tangent_field(c, rng)
    with pytest.warns(NotCriticalWarning):
        hessian_fd(c, 2, V, V)


def test_hessian_fd_nonnegative_at_geodesic(s2, rng):
    geo = circle_curve(s2, 0.0, 64)
    for _ in range(3):
        V = fourier_tangent_field(geo, rng)
        assert hessian_fd(geo, 2, V, V) >= -1e-8


def test_hessian_matrix_modes_agree(s2):
    c = circle_curve(s2, 1.0, 128)
    Hj, asym = hessian_matrix(c, 2, mode="jacobi")
    Hf, _ = hessian_matrix(c, 2, mode="fd")
    rel = np.linalg.norm(Hj - Hf, 2) / np.linalg.norm(Hf, 2)
    assert rel < 1e-2
    assert asym < 1e-6


def test_hessian_matrix_asymmetry_decays(s2):
    asyms = []
    for n in (64, 128):
        c = circle_curve(s2, 1.0, n)
        _, asym = hessian_matrix(c, 2, mode="jacobi")
        asyms.append(asym)
    assert asyms[0] < 1e-2
    assert asyms[0] / asyms[1] > 3.0


def test_spectrum_geodesic_weak_stability(s2):
    geo = circle_curve(s2, 0.0, 64)
    for k in (2, 3):
        H, _ = hessian_matrix(geo, k, mode="jacobi")
        evals = np.linalg.eigvalsh(H)
        assert evals.min() >= -1e-6 * np.max(np.abs(evals))


def test_index_nullity_identity_matrix():
    rep = index_nullity(np.eye(10), k=1)
    assert rep.index == 0 and rep.nullity == 0 and rep.basis_dim == 10
    assert rep.index + rep.nullity + int(np.sum(rep.eigenvalues > rep.epsilon)) == 10


def test_geodesic_order1_spectrum_brute_oracle(s2):
    """Cross-check the order-1 spectrum against scalar circulant operators.

    The fields on the equator split into a normal component (operator
    symbol s(n)^2 - s(1)^2 with s(n) = sin(n h)/h) and a tangential one
    (symbol s(n)^2).  The wide central difference folds back near the
    grid Nyquist frequency, so the discrete counts exceed the continuum
    (index 1, nullity 3): at even N the alternating mode duplicates the
    whole spectrum, at odd N the fold-back contributes one extra
    negative pair.  The operator matrix must agree with the scalar
    prediction exactly; the continuum counts are recovered on the
    resolved band.
    """
    for n in (63, 64):
        c = make_great_circle(n, s2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NotCriticalWarning)
            H, _ = hessian_matrix(c, 1, mode="jacobi")
        evals = np.linalg.eigvalsh(H / float(c.h))
        h = float(c.h)
        s = lambda m: np.sin(m * h) / h
        freqs = np.fft.fftfreq(n, d=1.0 / n).astype(int)
        normal = np.array([s(m) ** 2 - s(1) ** 2 for m in freqs])
        tangential = np.array([s(m) ** 2 for m in freqs])
        expect = np.sort(np.concatenate([normal, tangential]))
        np.testing.assert_allclose(evals, expect, atol=1e-8)
        eps = 1e-3 * np.max(np.abs(evals))
        index = int(np.sum(evals < -eps))
        nullity = int(np.sum(np.abs(evals) <= eps))
        assert (index, nullity) == ((3, 3) if n % 2 else (2, 6))
        # resolved band (|frequency| < n/4) carries the continuum counts
        band = np.concatenate([normal[np.abs(freqs) < n // 4],
                               tangential[np.abs(freqs) < n // 4]])
        assert int(np.sum(band < -eps)) == 1
        assert int(np.sum(np.abs(band) <= eps)) == 3


def test_index_nullity_basis_invariance(s2):
    c = circle_curve(s2, 0.0, 64)
    reports = []
    for seed in (1, 2):
        H, _ = hessian_matrix(c, 2, mode="jacobi", basis_seed=seed)
        reports.append(index_nullity(H, k=2))
    assert reports[0].index == reports[1].index
    assert reports[0].nullity == reports[1].nullity
    np.testing.assert_allclose(reports[0].eigenvalues, reports[1].eigenvalues,
                               atol=1e-8 * np.max(np.abs(reports[0].eigenvalues)))


def test_spectrum_report_serialization(s2):
    c = circle_curve(s2, 0.0, 64)
    H, _ = hessian_matrix(c, 2, mode="jacobi")
    rep = index_nullity(H, k=2)
    d = rep.to_dict()
    assert set(d) == {"k", "epsilon", "index", "nullity", "eigenvalues"}
    assert len(d["eigenvalues"]) == rep.basis_dim


def test_nullity_characterization(s2):
    # the composite through the order-1 operator shares the kernel dimension;
    # at odd N the counts also match the continuum value 3 for order 2
    godd = make_great_circle(65, s2)
    dk, dc = nullity_characterization_check(godd, 2)
    assert dk == dc == 3
    dk3, dc3 = nullity_characterization_check(godd, 3)
    assert dk3 == dc3
    geven = make_great_circle(64, s2)
    dk_e, dc_e = nullity_characterization_check(geven, 2)
    assert dk_e == dc_e


def test_nullity_characterization_requires_harmonic(s2):
    c = circle_curve(s2, 1.0, 64)
    with pytest.raises(NotHarmonic):
        nullity_characterization_check(c, 2)
    geo = circle_curve(s2, 0.0, 64)
    with pytest.raises(ValidationError):
        nullity_characterization_check(geo, 1)


def test_variation_preconditions(s2):
    c = circle_curve(s2, 0.0, 64)
    with pytest.raises(ValidationError):
        jacobi_apply(c, 5, kh.TangentField(c, np.zeros_like(c.points)))
    small = make_great_circle(40, s2)
    with pytest.raises(StencilTooCoarse):
        jacobi_apply(small, 2, kh.TangentField(small, np.zeros_like(small.points)))
