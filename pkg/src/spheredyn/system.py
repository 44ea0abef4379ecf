"""The core dynamical object: x -> (a + T x) / ||a + T x|| on the unit sphere.

A system is built from an invertible matrix T and an offset a.  It is
certified as a homeomorphism when ||T^-1 a|| < 1 - TOL_BOUNDARY; with a = 0
the system runs in projective mode, x -> T x / ||T x||.  Systems are
immutable and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DegenerateImage,
    HomeoConditionViolated,
    NotInvertible,
)

TOL_BOUNDARY = 1e-9
UNIT_TOL = 1e-8


@dataclass(frozen=True)
class AffineSphereSystem:
    T: np.ndarray
    a: np.ndarray
    dim: int
    sphere_dim: int
    homeo_certified: bool
    projective_mode: bool
    T_inv: np.ndarray
    T_inv_a: np.ndarray

    def contraction_norm(self) -> float:
        """||T^-1 a||, recomputed from the stored matrices."""
        return float(np.linalg.norm(self.T_inv @ self.a))


def build(T, a, require_homeo: bool = False) -> AffineSphereSystem:
    """Construct a system, certifying the homeomorphism condition.

    Raises HomeoConditionViolated when require_homeo is set and
    ||T^-1 a|| >= 1 - TOL_BOUNDARY, and SingularMatrix for non-invertible T.
    """
    T = linalg.as_matrix(T)
    a = np.asarray(a, dtype=float)
    if a.shape != (T.shape[0],):
        raise ValueError(f"offset shape {a.shape} does not match dim {T.shape[0]}")
    T_inv = linalg.invert(T)
    T_inv_a = T_inv @ a
    norm = float(np.linalg.norm(T_inv_a))
    certified = norm < 1.0 - TOL_BOUNDARY
    if require_homeo and not certified:
        raise HomeoConditionViolated(
            f"||T^-1 a|| = {norm:.12g} is not below 1 - {TOL_BOUNDARY:g}"
        )
    for arr in (T, a, T_inv, T_inv_a):
        arr.setflags(write=False)
    return AffineSphereSystem(
        T=T,
        a=a,
        dim=T.shape[0],
        sphere_dim=T.shape[0] - 1,
        homeo_certified=certified,
        projective_mode=bool(np.linalg.norm(a) == 0.0),
        T_inv=T_inv,
        T_inv_a=T_inv_a,
    )


def _check_unit(x: np.ndarray, tol: float = UNIT_TOL) -> None:
    norms = np.linalg.norm(x, axis=0)
    if not np.all(np.abs(norms - 1.0) <= tol):
        worst = float(np.max(np.abs(norms - 1.0)))
        raise ValueError(f"input must be on the unit sphere (|norm-1| = {worst:.3e})")


def _apply_cols(sys: AffineSphereSystem, cols: np.ndarray) -> np.ndarray:
    """Forward step on (dim, m) columns, no input validation (hot path)."""
    y = sys.a[:, None] + sys.T @ cols
    norms = np.sqrt(np.einsum("ij,ij->j", y, y))
    if np.any(norms <= linalg.TOL_SINGULAR):
        raise DegenerateImage("a + T x is numerically zero")
    return y / norms


def _apply_inverse_cols(sys: AffineSphereSystem, cols: np.ndarray) -> np.ndarray:
    """Backward step on (dim, m) columns, no input validation (hot path)."""
    w = sys.T_inv @ cols
    A = np.einsum("ij,ij->j", w, w)
    B = w.T @ sys.T_inv_a
    C = float(sys.T_inv_a @ sys.T_inv_a) - 1.0
    disc = np.sqrt(B * B - A * C)
    t = (B + disc) / A
    x = sys.T_inv @ (t * cols - sys.a[:, None])
    return x / np.sqrt(np.einsum("ij,ij->j", x, x))


def apply(sys: AffineSphereSystem, x) -> np.ndarray:
    """One forward step of the sphere map.

    x may be a single unit vector of shape (dim,) or a batch (dim, m);
    columns are mapped independently.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    cols = x.reshape(sys.dim, -1)
    _check_unit(cols)
    y = _apply_cols(sys, cols)
    return y[:, 0] if single else y


def apply_inverse(sys: AffineSphereSystem, y) -> np.ndarray:
    """One backward step; requires certification (or projective mode).

    Solves for the radial multiplier t > 0 with ||T^-1 (t y - a)|| = 1:
    the quadratic ||T^-1 y||^2 t^2 - 2 <T^-1 y, T^-1 a> t + ||T^-1 a||^2 - 1
    has roots of opposite sign because ||T^-1 a|| < 1, so the positive root
    is unique.
    """
    if not (sys.homeo_certified or sys.projective_mode):
        raise NotInvertible("system is not certified; inverse unavailable")
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    cols = y.reshape(sys.dim, -1)
    _check_unit(cols)
    x = _apply_inverse_cols(sys, cols)
    return x[:, 0] if single else x


@dataclass(frozen=True)
class OrbitSegment:
    """Orbit points x_k for k in [n_min, n_max], with n_min <= 0 <= n_max.

    norm_factors[k] is the denominator ||a + T(x_k)|| of the forward step
    k -> k+1, recorded for k = 0 .. n_max-1.
    """

    base_point: np.ndarray
    n_min: int
    n_max: int
    points: np.ndarray  # shape (n_max - n_min + 1, dim)
    norm_factors: np.ndarray  # shape (n_max,)

    def point(self, k: int) -> np.ndarray:
        if not self.n_min <= k <= self.n_max:
            raise IndexError(f"index {k} outside [{self.n_min}, {self.n_max}]")
        return self.points[k - self.n_min]


def orbit(sys: AffineSphereSystem, x, n_min: int, n_max: int) -> OrbitSegment:
    """Iterate the map over an index window containing 0.

    Points are re-normalized after every step to block drift on long
    orbits.  Negative indices need a certified (or projective) system.
    """
    if not (n_min <= 0 <= n_max):
        raise ValueError("orbit window must satisfy n_min <= 0 <= n_max")
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.dim,):
        raise ValueError(f"orbit starts from a single point of shape ({sys.dim},)")
    _check_unit(x.reshape(sys.dim, -1))
    x = x / np.linalg.norm(x)
    if n_min < 0 and not (sys.homeo_certified or sys.projective_mode):
        raise NotInvertible("backward orbit requested on an uncertified system")

    forward = [x]
    factors = []
    for _ in range(n_max):
        y = sys.a + sys.T @ forward[-1]
        norms = float(np.linalg.norm(y))
        if norms <= linalg.TOL_SINGULAR:
            raise DegenerateImage("a + T x is numerically zero along the orbit")
        factors.append(norms)
        forward.append(y / norms)
    backward = [x]
    for _ in range(-n_min):
        backward.append(apply_inverse(sys, backward[-1]))
    points = np.array(backward[::-1][:-1] + forward)
    return OrbitSegment(
        base_point=x,
        n_min=n_min,
        n_max=n_max,
        points=points,
        norm_factors=np.array(factors),
    )


def cmul(u, v) -> np.ndarray:
    """Complex multiplication on R^2: (u1 + i u2)(v1 + i v2)."""
    return np.array([u[0] * v[0] - u[1] * v[1], u[0] * v[1] + u[1] * v[0]])


def cinv(u) -> np.ndarray:
    """Complex inverse on R^2 \\ {0}."""
    n2 = u[0] * u[0] + u[1] * u[1]
    return np.array([u[0] / n2, -u[1] / n2])


def _is_rotation(T: np.ndarray) -> bool:
    return (
        T.shape == (2, 2)
        and np.linalg.norm(T.T @ T - np.eye(2)) <= 1e-9
        and np.linalg.det(T) > 0
    )


def scalar_equivariance_check(T, a, s, x, n: int) -> float:
    """Residual of the S^1 equivariance law for rotations.

    For T a rotation and s a unit complex number, the map with offset s*a
    applied to s*x must equal s times the map with offset a applied to x,
    for every iterate.  Returns || (s a)-orbit point - s * (a)-orbit point ||
    after n steps.
    """
    T = linalg.as_matrix(T)
    if not _is_rotation(T):
        raise ValueError("scalar equivariance needs a 2x2 rotation matrix")
    s = np.asarray(s, dtype=float)
    if abs(np.linalg.norm(s) - 1.0) > UNIT_TOL:
        raise ValueError("s must be a unit complex number")
    base = build(T, np.asarray(a, dtype=float), require_homeo=True)
    rotated = build(T, cmul(s, base.a), require_homeo=True)
    lhs = orbit(rotated, cmul(s, np.asarray(x, dtype=float)), 0, n).points[-1]
    rhs = cmul(s, orbit(base, x, 0, n).points[-1])
    return float(np.linalg.norm(lhs - rhs))


def system_to_dict(sys: AffineSphereSystem) -> dict:
    """JSON-ready description: {"dim", "matrix", "offset"}."""
    return {
        "dim": sys.dim,
        "matrix": [[float(v) for v in row] for row in sys.T],
        "offset": [float(v) for v in sys.a],
    }


def system_from_dict(desc: dict, require_homeo: bool = False) -> AffineSphereSystem:
    """Rebuild a system from its JSON description."""
    try:
        dim = int(desc["dim"])
        T = np.asarray(desc["matrix"], dtype=float)
        a = np.asarray(desc["offset"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed system description: {exc}") from exc
    if T.shape != (dim, dim) or a.shape != (dim,):
        raise ValueError(
            f"system description shapes disagree: dim={dim}, "
            f"matrix {T.shape}, offset {a.shape}"
        )
    return build(T, a, require_homeo=require_homeo)
