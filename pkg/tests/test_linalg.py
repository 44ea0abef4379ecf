import math

import numpy as np
import pytest

import spheredyn as sd
from spheredyn import linalg
from spheredyn.errors import ConvergenceFailure, NearUnitModulusAmbiguity, SingularMatrix

from conftest import random_invertible


def test_invert_identity():
    assert np.allclose(sd.invert(np.eye(3)), np.eye(3))


def test_invert_diagonal():
    assert np.allclose(sd.invert(np.diag([2.0, -2.0])), np.diag([0.5, -0.5]))


def test_invert_unipotent_closed_form():
    assert np.allclose(sd.invert([[1.0, 1.0], [0.0, 1.0]]), [[1.0, -1.0], [0.0, 1.0]])


def test_invert_rejects_singular():
    with pytest.raises(SingularMatrix):
        sd.invert([[1.0, 2.0], [2.0, 4.0]])


def test_invert_is_involution():
    rng = np.random.default_rng(1)
    for dim in (2, 3, 5):
        M = random_invertible(rng, dim)
        assert np.max(np.abs(sd.invert(sd.invert(M)) - M)) < 1e-9


def test_invert_residual():
    rng = np.random.default_rng(2)
    for dim in (2, 4, 8):
        M = random_invertible(rng, dim)
        assert np.max(np.abs(M @ sd.invert(M) - np.eye(dim))) < 1e-10


def test_operator_norm_isometry():
    assert sd.operator_norm(np.eye(4)) == pytest.approx(1.0, rel=1e-10)
    assert sd.operator_norm(sd.rotation_matrix(0.7)) == pytest.approx(1.0, rel=1e-10)


def test_operator_norm_diagonal():
    assert sd.operator_norm(np.diag([3.0, 0.5])) == pytest.approx(3.0, rel=1e-10)


def test_operator_norm_matches_svd():
    rng = np.random.default_rng(3)
    for dim in (2, 3, 5):
        M = rng.standard_normal((dim, dim))
        expected = float(np.linalg.svd(M, compute_uv=False)[0])
        assert sd.operator_norm(M) == pytest.approx(expected, rel=1e-9)


def test_operator_norm_submultiplicative():
    rng = np.random.default_rng(4)
    for _ in range(20):
        M = rng.standard_normal((3, 3))
        N = rng.standard_normal((3, 3))
        assert (
            sd.operator_norm(M @ N)
            <= sd.operator_norm(M) * sd.operator_norm(N) + 1e-9
        )


def test_operator_norm_iteration_cap():
    with pytest.raises(ConvergenceFailure):
        sd.operator_norm(np.diag([2.0, 1.0]), max_iter=0)


def test_spectrum_diagonal():
    s = sd.spectrum(np.diag([0.5, 2.0]))
    assert s.is_proximal
    assert s.dominant_modulus == pytest.approx(2.0)
    assert s.contraction_basis.shape == (2, 1)
    assert abs(abs(s.contraction_basis[0, 0]) - 1.0) < 1e-12
    assert s.expansion_basis.shape == (2, 1)


def test_spectrum_rotation_unit_pair():
    s = sd.spectrum(sd.rotation_matrix(math.pi / 3))
    assert not s.is_proximal
    assert s.contraction_basis.shape[1] == 0
    assert s.expansion_basis.shape[1] == 0
    expected = {complex(0.5, math.sin(math.pi / 3)), complex(0.5, -math.sin(math.pi / 3))}
    for lam in s.eigenvalues:
        assert min(abs(lam - mu) for mu in expected) < 1e-12
    assert len(s.near_unit) == 2


def test_spectrum_near_unit_raise_mode():
    with pytest.raises(NearUnitModulusAmbiguity):
        sd.spectrum(sd.rotation_matrix(0.4), on_near_unit="raise")


def test_spectrum_jordan_block_not_proximal():
    s = sd.spectrum([[1.0, 1.0], [0.0, 1.0]])
    assert not s.is_proximal
    assert np.allclose(s.eigenvalues, [1.0, 1.0])


def test_spectrum_eigenvalue_count_and_char_poly():
    # independent oracle: |det(M - lambda I)| must vanish at every eigenvalue
    rng = np.random.default_rng(5)
    for dim in (2, 3, 4, 5):
        M = random_invertible(rng, dim)
        s = sd.spectrum(M)
        assert len(s.eigenvalues) == dim
        bound = 1e-8 * (1.0 + np.linalg.norm(M, 2) ** dim)
        for lam in s.eigenvalues:
            residual = abs(np.linalg.det(M - lam * np.eye(dim)))
            assert residual < bound


def test_contraction_basis_decay():
    # 64 direct iterations amplify rounding noise along the expanding
    # direction by |lambda_max|^64, so the expansion is kept at 1.2 to
    # leave the decay observable above the noise floor
    rng = np.random.default_rng(6)
    for trial in range(10):
        dim = 3 + trial % 3
        mods = rng.uniform(0.62, 0.8, size=dim - 1)
        D = np.diag(np.concatenate([[1.15], mods * rng.choice([-1, 1], dim - 1)]))
        Q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
        M = Q @ D @ Q.T
        s = sd.spectrum(M)
        assert s.contraction_basis.shape[1] == dim - 1
        worst = float(np.max(mods))
        for j in range(s.contraction_basis.shape[1]):
            v = s.contraction_basis[:, j]
            norms = [1.0]
            w = v.copy()
            for _ in range(64):
                w = M @ w
                norms.append(float(np.linalg.norm(w)))
            assert norms[64] < 1e-6
            assert norms[64] < worst**64 * dim * 10
            # eventually strictly decreasing (before the noise floor)
            tail = norms[8:36]
            assert all(b < a for a, b in zip(tail, tail[1:]))


def test_invariant_2plane_whole_space_for_2x2():
    rng = np.random.default_rng(7)
    frame = sd.invariant_2plane(random_invertible(rng, 2))
    assert np.allclose(frame, np.eye(2))


def test_invariant_2plane_two_smallest_moduli():
    M = np.diag([2.0, 3.0, 5.0])
    frame = sd.invariant_2plane(M)
    # span{e1, e2}: image of the frame under M stays in the span
    assert np.allclose(np.abs(frame[:2, :]), np.eye(2))
    assert np.allclose(frame[2, :], 0.0)
    image = M @ frame
    proj = frame @ (frame.T @ image)
    assert np.max(np.abs(image - proj)) < 1e-12


def test_invariant_2plane_prefers_complex_pair():
    M = np.zeros((4, 4))
    M[:2, :2] = sd.rotation_matrix(math.pi / 4)
    M[2:, 2:] = np.diag([2.0, 3.0])
    frame = sd.invariant_2plane(M)
    assert np.max(np.abs(frame[2:, :])) < 1e-12
    assert linalg.plane_residual(M, frame) < 1e-8


def test_invariant_2plane_residual_random():
    rng = np.random.default_rng(8)
    for dim in (3, 4, 5):
        M = random_invertible(rng, dim)
        frame = sd.invariant_2plane(M)
        assert frame.shape == (dim, 2)
        assert np.allclose(frame.T @ frame, np.eye(2), atol=1e-12)
        assert linalg.plane_residual(M, frame) < 1e-8 * (1 + np.linalg.norm(M, 2))


def test_invariant_2plane_repeated_eigenvalue():
    # defective repeated eigenvalue: generalized-kernel fallback
    M = np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]])
    frame = sd.invariant_2plane(M)
    assert linalg.plane_residual(M, frame) < 1e-8


def test_spectrum_lists_invariant_planes():
    M = np.zeros((4, 4))
    M[:2, :2] = sd.rotation_matrix(math.pi / 4)
    M[2:, 2:] = np.diag([2.0, 3.0])
    s = sd.spectrum(M)
    assert len(s.invariant_2planes) >= 2
    for frame in s.invariant_2planes:
        assert linalg.plane_residual(M, frame) < 1e-7
