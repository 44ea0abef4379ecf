import math

import numpy as np
import pytest

import spheredyn as sd
from spheredyn.errors import (
    DegenerateImage,
    HomeoConditionViolated,
    NotInvertible,
    SingularMatrix,
)
from spheredyn.system import cinv, cmul

from conftest import random_certified_system, unit_columns


def test_build_identity_certified():
    sys = sd.build(np.eye(2), np.array([0.0, 0.5]))
    assert sys.homeo_certified
    assert sys.contraction_norm() == pytest.approx(0.5)
    assert sys.sphere_dim == 1
    assert not sys.projective_mode


def test_build_rejects_large_offset_for_rotation():
    T = sd.rotation_matrix(0.9)
    with pytest.raises(HomeoConditionViolated):
        sd.build(T, np.array([0.0, 1.2]), require_homeo=True)
    # without the flag construction succeeds but stays uncertified
    assert not sd.build(T, np.array([0.0, 1.2])).homeo_certified


def test_build_contraction_norm_value():
    sys = sd.build(np.diag([1.0, -2.0]), np.array([0.0, math.sqrt(3.0)]))
    assert sys.homeo_certified
    assert sys.contraction_norm() == pytest.approx(math.sqrt(3.0) / 2.0, abs=1e-12)


def test_build_rejects_singular():
    with pytest.raises(SingularMatrix):
        sd.build(np.zeros((2, 2)), np.zeros(2))


def test_projective_mode():
    sys = sd.build(np.diag([2.0, 1.0]), np.zeros(2))
    assert sys.projective_mode and sys.homeo_certified


def test_apply_identity_fixes_normalized_offset():
    sys = sd.build(np.eye(2), np.array([0.0, 0.5]))
    assert np.allclose(sd.apply(sys, np.array([0.0, 1.0])), [0.0, 1.0])


def test_apply_negated_identity():
    sys = sd.build(-np.eye(2), np.array([0.0, 0.6]))
    assert np.allclose(sd.apply(sys, np.array([0.0, 1.0])), [0.0, -1.0])


def test_apply_rotation_fixed_point():
    sys = sd.build(sd.rotation_matrix(math.pi / 6), np.array([0.0, 0.6]))
    q = np.array([-0.8333333333333334, 0.5527707983925666])
    assert np.linalg.norm(sd.apply(sys, q) - q) < 1e-4


def test_apply_requires_unit_input():
    sys = sd.build(np.eye(2), np.array([0.0, 0.5]))
    with pytest.raises(ValueError):
        sd.apply(sys, np.array([0.5, 0.0]))


def test_apply_output_unit_norm():
    rng = np.random.default_rng(10)
    for dim in (2, 3, 4, 5):
        sys = random_certified_system(rng, dim)
        X = unit_columns(rng, dim, 200)
        Y = sd.apply(sys, X)
        assert np.max(np.abs(np.linalg.norm(Y, axis=0) - 1.0)) < 1e-12


def test_apply_degenerate_image_without_certification():
    # a + T x = 0 at x = (0, 1): uncertified map hits the singular point
    sys = sd.build(np.eye(2), np.array([0.0, -1.0]))
    assert not sys.homeo_certified
    with pytest.raises(DegenerateImage):
        sd.apply(sys, np.array([0.0, 1.0]))


def test_apply_inverse_projective_identity():
    sys = sd.build(np.eye(3), np.zeros(3))
    y = np.array([0.0, 0.6, 0.8])
    assert np.allclose(sd.apply_inverse(sys, y), y)


def test_apply_inverse_fixed_point():
    sys = sd.build(np.eye(2), np.array([0.0, 0.5]))
    assert np.allclose(sd.apply_inverse(sys, np.array([0.0, 1.0])), [0.0, 1.0])


def test_apply_inverse_requires_certification():
    sys = sd.build(np.eye(2), np.array([0.0, 1.5]))
    with pytest.raises(NotInvertible):
        sd.apply_inverse(sys, np.array([0.0, 1.0]))


def test_round_trip_random_systems():
    rng = np.random.default_rng(11)
    for dim in (2, 3, 4, 5):
        for _ in range(5):
            sys = random_certified_system(rng, dim)
            X = unit_columns(rng, dim, 100)
            assert np.max(np.linalg.norm(sd.apply(sys, sd.apply_inverse(sys, X)) - X, axis=0)) < 1e-10
            assert np.max(np.linalg.norm(sd.apply_inverse(sys, sd.apply(sys, X)) - X, axis=0)) < 1e-10


def test_radial_multiplier_root_selection():
    # independent oracle: companion-matrix roots of the quadratic in t
    rng = np.random.default_rng(12)
    for _ in range(20):
        sys = random_certified_system(rng, 4)
        y = unit_columns(rng, 4, 1)[:, 0]
        w = sys.T_inv @ y
        A = float(w @ w)
        B = float(w @ sys.T_inv_a)
        C = float(sys.T_inv_a @ sys.T_inv_a) - 1.0
        roots = np.roots([A, -2.0 * B, C])
        assert roots[0] * roots[1] < 0  # opposite signs
        t_star = float(max(roots.real))
        x = sys.T_inv @ (t_star * y - sys.a)
        assert abs(np.linalg.norm(x) - 1.0) < 1e-10
        assert np.linalg.norm(x / np.linalg.norm(x) - sd.apply_inverse(sys, y)) < 1e-9


def test_orbit_trivial_window():
    sys = sd.build(np.eye(2), np.array([0.0, 0.5]))
    seg = sd.orbit(sys, np.array([1.0, 0.0]), 0, 0)
    assert seg.points.shape == (1, 2)
    assert len(seg.norm_factors) == 0


def test_orbit_converges_to_attractor():
    sys = sd.build(np.eye(2), np.array([0.0, 0.5]))
    seg = sd.orbit(sys, np.array([1.0, 0.0]), 0, 200)
    assert np.linalg.norm(seg.point(200) - np.array([0.0, 1.0])) < 1e-6
    # norm factors are the step denominators
    for k in range(5):
        denom = np.linalg.norm(sys.a + sys.T @ seg.point(k))
        assert seg.norm_factors[k] == pytest.approx(denom, abs=1e-14)


def test_orbit_period2_closure():
    sys = sd.build(sd.rotation_matrix(math.pi - 0.05), np.array([0.0, 0.5]))
    rec = [r for r in sd.fixed_points_numeric(sys, 2) if r.period == 2][0]
    seg = sd.orbit(sys, rec.point, 0, 2)
    assert np.linalg.norm(seg.point(2) - rec.point) < 1e-8


def test_orbit_backward_needs_certification():
    sys = sd.build(np.eye(2), np.array([0.0, 1.5]))
    with pytest.raises(NotInvertible):
        sd.orbit(sys, np.array([1.0, 0.0]), -1, 0)


def test_orbit_steps_consistent_with_apply():
    rng = np.random.default_rng(13)
    sys = random_certified_system(rng, 3)
    x = unit_columns(rng, 3, 1)[:, 0]
    seg = sd.orbit(sys, x, -5, 5)
    for k in range(-5, 5):
        assert np.linalg.norm(sd.apply(sys, seg.point(k)) - seg.point(k + 1)) < 1e-10
    assert seg.points.shape == (11, 3)


def test_orbit_unit_norm_along_long_run():
    rng = np.random.default_rng(14)
    sys = random_certified_system(rng, 4)
    seg = sd.orbit(sys, unit_columns(rng, 4, 1)[:, 0], 0, 2000)
    assert np.max(np.abs(np.linalg.norm(seg.points, axis=1) - 1.0)) < 1e-12


def test_scalar_equivariance_trivial_scalar():
    res = sd.scalar_equivariance_check(
        sd.rotation_matrix(0.3), [0.0, 0.6], [1.0, 0.0], [1.0, 0.0], 5
    )
    assert res == 0.0


def test_scalar_equivariance_quarter_turn():
    res = sd.scalar_equivariance_check(
        sd.rotation_matrix(math.pi / 6), [0.0, 0.6], [0.0, 1.0], [1.0, 0.0], 10
    )
    assert res < 1e-9


def test_scalar_equivariance_random_scalars():
    rng = np.random.default_rng(15)
    for _ in range(10):
        phi = rng.uniform(0, 2 * math.pi)
        s = np.array([math.cos(phi), math.sin(phi)])
        x = unit_columns(rng, 2, 1)[:, 0]
        n = int(rng.integers(1, 50))
        res = sd.scalar_equivariance_check(
            sd.rotation_matrix(0.4), [0.0, 0.55], s, x, n
        )
        assert res < 1e-9
    # s = -1 at n = 25 specifically
    res = sd.scalar_equivariance_check(
        sd.rotation_matrix(0.4), [0.0, 0.55], [-1.0, 0.0], unit_columns(rng, 2, 1)[:, 0], 25
    )
    assert res < 1e-9


def test_projective_map_is_odd():
    rng = np.random.default_rng(16)
    T = rng.standard_normal((4, 4))
    sys = sd.build(T, np.zeros(4))
    X = unit_columns(rng, 4, 50)
    assert np.max(np.linalg.norm(sd.apply(sys, -X) + sd.apply(sys, X), axis=0)) < 1e-12


def test_complex_helpers():
    u, v = np.array([1.0, 2.0]), np.array([3.0, -1.0])
    assert np.allclose(cmul(u, v), [5.0, 5.0])
    assert np.allclose(cmul(u, cinv(u)), [1.0, 0.0])


def test_system_dict_round_trip():
    sys = sd.build(np.diag([1.0, -2.0]), np.array([0.0, math.sqrt(3.0)]))
    desc = sd.system_to_dict(sys)
    assert set(desc) == {"dim", "matrix", "offset"}
    again = sd.system_from_dict(desc)
    assert np.array_equal(again.T, sys.T)
    assert np.array_equal(again.a, sys.a)


def test_system_from_dict_validates():
    with pytest.raises(ValueError):
        sd.system_from_dict({"dim": 2, "matrix": [[1, 0]], "offset": [0, 0]})
    with pytest.raises(ValueError):
        sd.system_from_dict({"matrix": [[1, 0], [0, 1]], "offset": [0, 0]})
