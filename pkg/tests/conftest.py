import math

import numpy as np
import pytest

import spheredyn as sd


@pytest.fixture
def identity_system():
    return sd.build(np.eye(2), np.array([0.0, 0.5]))


@pytest.fixture
def involution_system():
    return sd.build(np.diag([1.0, -2.0]), np.array([0.0, math.sqrt(3.0)]))


@pytest.fixture
def rotation_third_system():
    return sd.build(sd.rotation_matrix(math.pi / 3), np.array([0.0, 0.5]))


def random_invertible(rng, dim, det_floor=1e-3):
    while True:
        M = rng.standard_normal((dim, dim))
        if abs(np.linalg.det(M)) > det_floor:
            return M


def random_certified_system(rng, dim):
    """A random system with ||T^-1 a|| < 1 by the operator-norm bound."""
    T = random_invertible(rng, dim)
    direction = rng.standard_normal(dim)
    direction /= np.linalg.norm(direction)
    a = direction * rng.uniform(0.1, 0.9) / sd.operator_norm(np.linalg.inv(T))
    return sd.build(T, a, require_homeo=True)


def random_proximal(rng, dim, positive_det=False):
    """Proximal matrix with dominant eigenvalue exactly 1 and the rest
    contracting; returns (matrix, fixed unit eigenvector)."""
    moduli = rng.uniform(0.2, 0.8, size=dim - 1)
    blocks = [np.array([[1.0]])]
    i = 0
    while i < dim - 1:
        if i + 1 < dim - 1 and rng.random() < 0.5:
            theta = rng.uniform(0.2, math.pi - 0.2)
            blocks.append(moduli[i] * sd.rotation_matrix(theta))
            i += 2
        else:
            blocks.append(np.array([[moduli[i] * rng.choice([-1.0, 1.0])]]))
            i += 1
    if positive_det:
        sign = math.prod(float(np.linalg.det(b)) for b in blocks)
        if sign < 0:
            for b in reversed(blocks):
                if b.shape == (1, 1):
                    b[0, 0] = -b[0, 0]
                    break
    D = np.zeros((dim, dim))
    pos = 0
    for b in blocks:
        k = b.shape[0]
        D[pos:pos + k, pos:pos + k] = b
        pos += k
    Q = rng.standard_normal((dim, dim))
    while abs(np.linalg.det(Q)) < 0.3:
        Q = rng.standard_normal((dim, dim))
    T = Q @ D @ np.linalg.inv(Q)
    fixed_dir = Q[:, 0] / np.linalg.norm(Q[:, 0])
    return T, fixed_dir


def unit_columns(rng, dim, n):
    X = rng.standard_normal((dim, n))
    return X / np.linalg.norm(X, axis=0)
