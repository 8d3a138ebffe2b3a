import numpy as np
import pytest

import kharmonic as kh
from kharmonic import flat, product_space, sphere
from kharmonic.errors import ValidationError, ZeroVector


def test_project_point_sphere_radial_scaling():
    s = sphere(2)
    np.testing.assert_allclose(s.project_point(np.array([0.0, 0.0, 2.0])),
                               [0.0, 0.0, 1.0])
    s2 = sphere(2, radius=2.0)
    np.testing.assert_allclose(s2.project_point(np.array([3.0, 0.0, 0.0])),
                               [2.0, 0.0, 0.0])


def test_project_point_flat_identity():
    f = flat(2)
    x = np.array([1.0, 2.0])
    np.testing.assert_array_equal(f.project_point(x), x)


def test_project_point_zero_vector_raises():
    with pytest.raises(ZeroVector):
        sphere(2).project_point(np.zeros(3))


def test_project_tangent_examples():
    s = sphere(2)
    p = np.array([0.0, 0.0, 1.0])
    np.testing.assert_allclose(s.project_tangent(p, np.array([1.0, 0.0, 5.0])),
                               [1.0, 0.0, 0.0])
    # radial input dies
    np.testing.assert_allclose(
        s.project_tangent(np.array([1.0, 0.0, 0.0]), np.array([2.0, 0.0, 0.0])),
        [0.0, 0.0, 0.0], atol=1e-15)


def test_project_tangent_idempotent_and_self_adjoint(rng):
    for space in (sphere(2), sphere(3, radius=0.5),
                  product_space(sphere(2), flat(2))):
        p = space.project_point(rng.standard_normal((20, space.ambient_dim)) + 0.1)
        v = rng.standard_normal((20, space.ambient_dim))
        w = rng.standard_normal((20, space.ambient_dim))
        pv = space.project_tangent(p, v)
        np.testing.assert_allclose(space.project_tangent(p, pv), pv, atol=1e-12)
        lhs = np.sum(pv * w, axis=1)
        rhs = np.sum(v * space.project_tangent(p, w), axis=1)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_curvature_op_examples():
    s = sphere(2)
    p = np.array([0.0, 0.0, 1.0])
    e1 = np.array([1.0, 0.0, 0.0])
    e2 = np.array([0.0, 1.0, 0.0])
    np.testing.assert_allclose(s.curvature_op(p, e1, e2, e2), e1)
    np.testing.assert_allclose(s.curvature_op(p, e1, e1, e2), 0.0, atol=1e-15)
    f = flat(3)
    np.testing.assert_array_equal(
        f.curvature_op(p, e1, e2, e2), np.zeros(3))


def test_curvature_op_identities(rng):
    for space in (sphere(2), sphere(2, radius=1.7),
                  product_space(sphere(2), sphere(2, radius=0.5))):
        d = space.ambient_dim
        p = space.project_point(rng.standard_normal((16, d)) + 0.1)
        V, W, Z, U = (space.project_tangent(p, rng.standard_normal((16, d)))
                      for _ in range(4))
        R = space.curvature_op
        np.testing.assert_allclose(R(p, V, W, Z), -R(p, W, V, Z), atol=1e-12)
        lhs = np.sum(R(p, V, W, Z) * U, axis=1)
        rhs = -np.sum(R(p, V, W, U) * Z, axis=1)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)
        bianchi = R(p, V, W, Z) + R(p, W, Z, V) + R(p, Z, V, W)
        np.testing.assert_allclose(bianchi, 0.0, atol=1e-12)


def test_curvature_op_vanishes_on_circle_target(rng):
    s1 = sphere(1, radius=2.0)
    p = s1.project_point(rng.standard_normal((8, 2)) + 0.1)
    V, W, Z = (s1.project_tangent(p, rng.standard_normal((8, 2))) for _ in range(3))
    np.testing.assert_allclose(s1.curvature_op(p, V, W, Z), 0.0, atol=1e-14)


def test_exp_map_examples():
    s = sphere(2)
    p = np.array([1.0, 0.0, 0.0])
    np.testing.assert_array_equal(s.exp_map(p, np.zeros(3)), p)
    q = s.exp_map(p, np.array([0.0, np.pi / 2, 0.0]))
    np.testing.assert_allclose(q, [0.0, 1.0, 0.0], atol=1e-15)
    f = flat(2)
    np.testing.assert_allclose(f.exp_map(np.array([1.0, 1.0]), np.array([2.0, 0.0])),
                               [3.0, 1.0])


def test_exp_map_membership_and_speed_rate(rng):
    s = sphere(2, radius=1.5)
    p = s.project_point(rng.standard_normal(3))
    v = s.project_tangent(p, rng.standard_normal(3))
    errs = []
    for t in (0.1, 0.05, 0.025):
        q = s.exp_map(p, t * v)
        assert s.contains(q)
        chord = np.linalg.norm(q - p)
        errs.append(abs(chord - t * np.linalg.norm(v)))
    # chord approaches t|v| with a cubic defect
    assert errs[0] / errs[1] > 6.0
    assert errs[1] / errs[2] > 6.0


def test_product_space_blockwise(rng):
    prod = product_space(sphere(2), flat(2))
    assert prod.intrinsic_dim == 4 and prod.ambient_dim == 5
    x = rng.standard_normal((4, 5)) + 0.1
    px = prod.project_point(x)
    np.testing.assert_allclose(px[:, :3], sphere(2).project_point(x[:, :3]))
    np.testing.assert_array_equal(px[:, 3:], x[:, 3:])
    assert prod.has_parallel_curvature


def test_tangent_basis_orthonormal(rng):
    for space in (sphere(2), flat(3), product_space(sphere(2), sphere(1))):
        p = space.project_point(rng.standard_normal(space.ambient_dim) + 0.1)
        B = space.tangent_basis(p)
        assert B.shape == (space.intrinsic_dim, space.ambient_dim)
        np.testing.assert_allclose(B @ B.T, np.eye(space.intrinsic_dim), atol=1e-12)
        np.testing.assert_allclose(space.project_tangent(p, B), B, atol=1e-12)


def test_invalid_space_descriptors():
    with pytest.raises(ValidationError):
        kh.SpaceForm(kind="sphere", intrinsic_dim=2, ambient_dim=3,
                     curvature=2.0, radius=1.0)
    with pytest.raises(ValidationError):
        kh.SpaceForm(kind="weird", intrinsic_dim=1, ambient_dim=1)
