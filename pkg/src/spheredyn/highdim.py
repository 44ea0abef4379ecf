"""Constructions on spheres of any dimension.

Builds offsets that force fixed or period-two points from eigenstructure
(real eigenvalue pairs, complex eigenvalues with positive real part, or
proximal matrices via the s_m coefficient recursion), searches powers and
conjugates when the matrix itself is not covered, and produces
non-expansivity witness pairs on invariant 2-planes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import certificates, circle, linalg
from .errors import (
    InternalInconsistency,
    NormalizationRequired,
    SearchExhausted,
    WitnessNotFound,
)
from .system import (
    AffineSphereSystem,
    _apply_cols,
    _apply_inverse_cols,
    apply,
    apply_inverse,
    build,
    cinv,
    cmul,
    system_to_dict,
)

EIG_REAL_TOL = 1e-9
ALIGN_TOL = 1e-8
CERT_MARGIN = 1e-6  # reject constructions landing this close to ||T^-1 a|| = 1
CONVERGE_TOL = 1e-6
CONVERGE_CAP = 10_000


# ---------------------------------------------------------------------------
# s_m coefficient ledger (the fixed-eigenvector normalization T a = a)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmLedger:
    """Coefficients of the closed-form iterate (s_m a + T^m x) / ||...||.

    s_1 = 1 and s_{i+1} = s_i + alpha_i with alpha_i = ||s_i a + T^i x||;
    alpha0 is the component of a orthogonal to the contraction space, which
    bounds the divergence: s_m >= 1 + (m-1) alpha0.
    """

    coefficients: np.ndarray  # s_1 .. s_m
    alphas: np.ndarray  # alpha_1 .. alpha_{m-1}
    alpha0: float


def sm_ledger(sys: AffineSphereSystem, x, m: int) -> SmLedger:
    """Fill the coefficient ledger and assert its invariants.

    Requires the normalization T a = a (within 1e-8); callers holding a
    proximal T with dominant eigenvalue lambda must pass T / lambda.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    T, a = sys.T, sys.a
    if np.linalg.norm(T @ a - a) > 1e-8 * (1.0 + np.linalg.norm(a)):
        raise NormalizationRequired("sm_ledger needs T a = a; divide T by lambda")
    x = np.asarray(x, dtype=float)
    x = x / np.linalg.norm(x)

    C = linalg.spectrum(T).contraction_basis
    if C.shape[1]:
        off = a - C @ (C.T @ a)
    else:
        off = a
    alpha0 = float(np.linalg.norm(off))

    coeffs = [1.0]
    alphas = []
    power = x.copy()  # T^i x, raw linear powers
    for _ in range(m - 1):
        power = T @ power
        alpha_i = float(np.linalg.norm(coeffs[-1] * a + power))
        alphas.append(alpha_i)
        coeffs.append(coeffs[-1] + alpha_i)

    s_m = coeffs[-1]
    if s_m < 1.0 + (m - 1) * alpha0 - 1e-8:
        raise InternalInconsistency(
            f"s_m = {s_m:.12g} below the divergence bound 1 + (m-1) alpha0"
        )
    closed = s_m * a + T @ power  # s_m a + T^m x
    closed = closed / np.linalg.norm(closed)
    iterated = x
    for _ in range(m):
        iterated = apply(sys, iterated)
    if np.linalg.norm(closed - iterated) > 1e-8 * m:
        raise InternalInconsistency(
            "closed-form iterate disagrees with direct iteration"
        )
    return SmLedger(
        coefficients=np.asarray(coeffs), alphas=np.asarray(alphas), alpha0=alpha0
    )


# ---------------------------------------------------------------------------
# eigenstructure-driven instances
# ---------------------------------------------------------------------------

def _real_eigen_directions(eigs, vecs):
    """(lambda, unit real eigenvector) pairs, deterministically signed."""
    out = []
    for i in range(len(eigs)):
        lam = eigs[i]
        if abs(lam.imag) > EIG_REAL_TOL * (1 + abs(lam)):
            continue
        u = vecs[:, i].real
        n = np.linalg.norm(u)
        if n == 0.0:
            continue
        u = u / n
        k = int(np.argmax(np.abs(u)))
        if u[k] < 0:
            u = -u
        out.append((float(lam.real), u))
    return out


def _unit_samples(dim, n, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((dim, n))
    return X / np.linalg.norm(X, axis=0)


def _squared_map_is_identity(sys, n_samples=64) -> bool:
    X = _unit_samples(sys.dim, n_samples)
    Y = apply(sys, apply(sys, X))
    return bool(np.max(np.linalg.norm(Y - X, axis=0)) < 1e-9)


def _fixed_point_witness(sys, point) -> certificates.Witness:
    residual = float(np.linalg.norm(apply(sys, point) - point))
    return certificates.Witness(
        kind=certificates.FIXED_POINT,
        system=system_to_dict(sys),
        data={"point": [float(v) for v in point], "period": 1, "residual": residual},
        tolerance=1e-9,
        seed=0,
    )


def _period2_witness(sys, point) -> certificates.Witness:
    image = apply(sys, point)
    back = apply(sys, image)
    residual = float(np.linalg.norm(back - point))
    return certificates.Witness(
        kind=certificates.PERIODIC_ORBIT,
        system=system_to_dict(sys),
        data={
            "points": [[float(v) for v in point], [float(v) for v in image]],
            "period": 2,
            "residual": residual,
        },
        tolerance=1e-9,
        seed=0,
    )


def _positive_eigen_instance(lam, u, T):
    """Offset along a positive eigendirection: a + T u = (lam/2 + lam) u,
    so u is an exact fixed point and ||T^-1 a|| = 1/2."""
    a = 0.5 * lam * u
    sys = build(T, a, require_homeo=True)
    return sys, _fixed_point_witness(sys, u)


def _negative_eigen_instance(lam, u, T):
    """Offset along a negative eigendirection gives the exact period-2 orbit
    {u, -u}; the scale is nudged if the choice happens to satisfy the
    involution conditions (the map would be distal there)."""
    for scale in (0.5, 1.0 / 3.0):
        a = scale * abs(lam) * u
        sys = build(T, a, require_homeo=True)
        if not _squared_map_is_identity(sys):
            return sys, _period2_witness(sys, u)
    raise InternalInconsistency(
        "both offset scales produced an involution; conditions cannot hold twice"
    )


def _plane_restriction(T, frame):
    """2x2 matrix of T on an exactly invariant orthonormal 2-frame."""
    return frame.T @ T @ frame


def _is_scaled_rotation(B):
    det = float(np.linalg.det(B))
    if det <= 0:
        return None
    t = math.sqrt(det)
    if np.linalg.norm(B.T @ B - det * np.eye(2)) > 1e-9 * max(det, 1.0):
        return None
    return t, B[0, 0] / t, B[1, 0] / t  # t, cos, sin


def _complex_pair_instance(T, frame):
    """Exact fixed point for a complex-eigenvalue invariant plane.

    Scaled-rotation restrictions take the two-fixed-point offset with
    ||a|| = t (1 + |sin|)/2; otherwise the offset a = s x - B x built from
    the top eigenvector x of sym(B^-1) fixes x exactly, with
    ||B^-1 a|| < 1 guaranteed by <B^-1 x, x> > 0.  Returns None when the
    certification margin is too thin to trust.
    """
    B = _plane_restriction(T, frame)
    rot = _is_scaled_rotation(B)
    if rot is not None:
        t, c, s = rot
        if c <= 0 or 1.0 - abs(s) < 2 * CERT_MARGIN:
            return None
        alpha = t * (1.0 + abs(s)) / 2.0
        a2 = np.array([0.0, alpha])
        root = math.sqrt(alpha * alpha - (t * s) ** 2)
        radial = t * c + root
        x2 = cmul(a2, cinv(np.array([radial - t * c, -t * s])))
    else:
        B_inv = np.linalg.inv(B)
        sym = 0.5 * (B_inv + B_inv.T)
        w, V = np.linalg.eigh(sym)
        x2 = V[:, int(np.argmax(w))]
        quad = float(x2 @ B_inv @ x2)
        if quad <= CERT_MARGIN:
            return None
        radial = quad / float(np.linalg.norm(B_inv @ x2) ** 2)
        a2 = radial * x2 - B @ x2
        if np.linalg.norm(B_inv @ a2) >= 1.0 - CERT_MARGIN:
            return None
    a = frame @ a2
    point = frame @ x2
    point = point / np.linalg.norm(point)
    sys = build(T, a, require_homeo=True)
    return sys, _fixed_point_witness(sys, point)


def proximal_convergence_instance(T):
    """Offset along the dominant eigendirection of a proximal matrix.

    Normalizes T by its dominant positive eigenvalue lambda (the sphere map
    is not scale invariant, so the normalized system is what is returned;
    the witness records the original matrix).  Every unit x in the
    contraction space then converges to a/||a||, with the rate governed by
    the s_m recursion.  Returns None when T is not proximal with a positive
    dominant eigenvalue, or when the orbit fails to close within the cap.
    """
    T = linalg.as_matrix(T)
    summary = linalg.spectrum(T)
    if not summary.is_proximal or np.linalg.det(T) <= 0:
        return None
    lam = summary.eigenvalues[0]
    if lam.real <= 0:
        return None
    lam = float(lam.real)
    Tn = T / lam
    eigs, vecs = np.linalg.eig(Tn)
    idx = int(np.argmin(np.abs(eigs - 1.0)))
    a_dir = vecs[:, idx].real
    a_dir = a_dir / np.linalg.norm(a_dir)
    k = int(np.argmax(np.abs(a_dir)))
    if a_dir[k] < 0:
        a_dir = -a_dir
    sysn = build(Tn, 0.5 * a_dir, require_homeo=True)

    contraction = linalg.spectrum(Tn).contraction_basis
    if contraction.shape[1] == 0:
        return None
    x = contraction[:, 0]
    point = x.copy()
    steps = 0
    final = float(np.linalg.norm(point - a_dir))
    while final >= CONVERGE_TOL and steps < CONVERGE_CAP:
        point = apply(sysn, point)
        steps += 1
        final = float(np.linalg.norm(point - a_dir))
    if final >= CONVERGE_TOL:
        return None
    witness = certificates.Witness(
        kind=certificates.CONVERGENCE,
        system=system_to_dict(sysn),
        data={
            "start": [float(v) for v in x],
            "target": [float(v) for v in a_dir],
            "steps": steps,
            "final_distance": final,
            "original_matrix": [[float(v) for v in row] for row in T],
            "lambda": lam,
        },
        tolerance=CONVERGE_TOL,
        seed=0,
    )
    return sysn, witness


def construct_nondistal_instance(T):
    """An offset making the sphere map of T carry a fixed or period-2 point.

    Dispatch: at least two real eigenvalues (a positive one gives an exact
    eigendirection fixed point, an all-negative pair the exact period-2
    orbit), else a complex eigenvalue with positive real part (invariant
    2-plane construction), else the proximal convergence route.  Returns
    (system, witness) or None when no construction from the theory applies.
    """
    T = linalg.as_matrix(T)
    linalg.invert(T)  # raises SingularMatrix early
    eigs, vecs = np.linalg.eig(T)
    reals = _real_eigen_directions(eigs, vecs)

    if len(reals) >= 2:
        positives = [(lam, u) for lam, u in reals if lam > 0]
        if positives:
            lam, u = max(positives, key=lambda r: r[0])
            return _positive_eigen_instance(lam, u, T)
        lam, u = max(reals, key=lambda r: abs(r[0]))
        return _negative_eigen_instance(lam, u, T)

    pairs = []
    for i in range(len(eigs)):
        lam = eigs[i]
        if lam.imag <= EIG_REAL_TOL * (1 + abs(lam)):
            continue
        cos_theta = lam.real / abs(lam)
        if cos_theta > EIG_REAL_TOL:
            pairs.append((cos_theta, i))
    pairs.sort(key=lambda rec: -rec[0])
    for _, i in pairs:
        v = vecs[:, i]
        frame = linalg._orthonormal_frame([v.real, v.imag])
        if linalg.plane_residual(T, frame) > linalg.PLANE_RESIDUAL_TOL * (
            1 + np.linalg.norm(T, 2)
        ):
            continue
        out = _complex_pair_instance(T, frame)
        if out is not None:
            return out

    return proximal_convergence_instance(T)


# ---------------------------------------------------------------------------
# conjugate / power search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchResult:
    S: np.ndarray
    kind: str  # "power" or "conjugate"
    power: int | None
    conjugator: np.ndarray | None  # C with S = C^-1 T C
    system: AffineSphereSystem
    witness: certificates.Witness


def _conjugate_candidate(T):
    """Conjugate T so one invariant-plane frame becomes orthonormal.

    With C = [Re v, Im v, complement] for a complex eigenvector v, the
    matrix C^-1 T C restricts to span{e1, e2} as an exact scaled rotation,
    making the two-fixed-point rotation offset available.
    """
    eigs, vecs = np.linalg.eig(T)
    best = None
    for i in range(len(eigs)):
        lam = eigs[i]
        if lam.imag <= EIG_REAL_TOL * (1 + abs(lam)):
            continue
        cos_theta = lam.real / abs(lam)
        if best is None or cos_theta > best[0]:
            best = (cos_theta, i)
    if best is None:
        return None
    v = vecs[:, best[1]]
    p, q = v.real, v.imag
    basis = np.column_stack([p, q])
    Qfull, _ = np.linalg.qr(basis, mode="complete")
    C = np.column_stack([p, q, Qfull[:, 2:]])
    S = np.linalg.solve(C, T @ C)
    return C, S


def conjugate_or_power_search(T, mode: str = "auto") -> SearchResult:
    """A matrix S in {T, T^2, T^3} or a conjugate of T with a nondistal map.

    Power mode tries T, T^2, T^3 in order (cos(theta) <= 0 always yields
    cos(2 theta) > 0 or cos(3 theta) > 0, so some power is covered by the
    eigenstructure constructions).  Conjugate mode rescales an invariant
    plane frame to orthonormal so the plane restriction becomes an exact
    scaled rotation.  auto runs powers first, then the conjugate.
    """
    if mode not in ("auto", "power", "conjugate"):
        raise ValueError("mode must be auto, power or conjugate")
    T = linalg.as_matrix(T)

    if mode in ("auto", "power"):
        S = T.copy()
        for k in (1, 2, 3):
            out = construct_nondistal_instance(S)
            if out is not None:
                sys, witness = out
                return SearchResult(
                    S=S, kind="power", power=k, conjugator=None,
                    system=sys, witness=witness,
                )
            S = S @ T

    if mode in ("auto", "conjugate"):
        cand = _conjugate_candidate(T)
        if cand is None and mode == "conjugate":
            # no complex pair: T itself has >= 2 real eigenvalues
            out = construct_nondistal_instance(T)
            if out is not None:
                sys, witness = out
                return SearchResult(
                    S=T, kind="conjugate", power=None,
                    conjugator=np.eye(T.shape[0]), system=sys, witness=witness,
                )
        if cand is not None:
            C, S = cand
            out = construct_nondistal_instance(S)
            if out is not None:
                sys, witness = out
                return SearchResult(
                    S=S, kind="conjugate", power=None, conjugator=C,
                    system=sys, witness=witness,
                )

    raise SearchExhausted(
        "no power or conjugate admitted a construction; this contradicts the "
        "covering argument, so check the input matrix"
    )


# ---------------------------------------------------------------------------
# non-expansivity witnesses on invariant 2-planes
# ---------------------------------------------------------------------------

def offset_invariant_plane(sys: AffineSphereSystem) -> np.ndarray:
    """An orthonormal T-invariant 2-frame whose span contains the offset.

    Projective systems get the default invariant plane.  Otherwise tries
    span{a, T a}, then eigen-planes containing a, then (for eigenvector
    offsets) pairing a with another eigendirection.  Raises WitnessNotFound
    when the offset is not aligned with any invariant plane.
    """
    T, a = sys.T, sys.a
    if sys.dim == 2:
        return np.eye(2)
    if sys.projective_mode:
        return linalg.invariant_2plane(T)
    alpha = float(np.linalg.norm(a))
    a_hat = a / alpha
    scale = linalg.PLANE_RESIDUAL_TOL * (1 + np.linalg.norm(T, 2))

    Ta = T @ a_hat
    lam = float(a_hat @ Ta)
    aligned = np.linalg.norm(Ta - lam * a_hat) <= ALIGN_TOL * (1 + abs(lam))
    if not aligned:
        frame = linalg._orthonormal_frame([a_hat, Ta])
        if linalg.plane_residual(T, frame) <= scale:
            return frame
        for frame in linalg.spectrum(T).invariant_2planes:
            if np.linalg.norm(a_hat - frame @ (frame.T @ a_hat)) <= ALIGN_TOL:
                return frame
        raise WitnessNotFound("offset does not lie in an invariant 2-plane")

    # a is an eigendirection: pair it with another invariant direction
    eigs, vecs = np.linalg.eig(T)
    for _, u in _real_eigen_directions(eigs, vecs):
        if abs(u @ a_hat) > 1.0 - 1e-9:
            continue
        frame = linalg._orthonormal_frame([a_hat, u])
        if linalg.plane_residual(T, frame) <= scale:
            return frame
    E2 = scipy.linalg.null_space(
        (T - lam * np.eye(sys.dim)) @ (T - lam * np.eye(sys.dim)),
        rcond=linalg.RANK_TOL,
    )
    for j in range(E2.shape[1]):
        w = E2[:, j]
        if abs(w @ a_hat) > 1.0 - 1e-9:
            continue
        frame = linalg._orthonormal_frame([a_hat, w])
        if linalg.plane_residual(T, frame) <= scale:
            return frame
    raise WitnessNotFound("eigenvector offset admits no invariant 2-plane partner")


def restricted_circle_system(sys: AffineSphereSystem, frame: np.ndarray):
    """The 2x2 system of the dynamics restricted to frame's invariant circle."""
    B = frame.T @ sys.T @ frame
    a2 = frame.T @ sys.a
    return build(B, a2)


def _validate_plane(sys, frame):
    frame = np.asarray(frame, dtype=float)
    if frame.shape != (sys.dim, 2):
        raise ValueError(f"plane frame must have shape ({sys.dim}, 2)")
    if np.linalg.norm(frame.T @ frame - np.eye(2)) > 1e-8:
        raise ValueError("plane frame must be orthonormal")
    if linalg.plane_residual(sys.T, frame) > linalg.PLANE_RESIDUAL_TOL * (
        1 + np.linalg.norm(sys.T, 2)
    ):
        raise ValueError("plane is not invariant under T")
    off = sys.a - frame @ (frame.T @ sys.a)
    if np.linalg.norm(off) > ALIGN_TOL * max(1.0, np.linalg.norm(sys.a)):
        raise ValueError("offset does not lie in the given plane")
    return frame


def _pair_sup_batch(sys2, X, Y, horizon, delta):
    """Max chord distance over the bi-infinite window for paired columns.

    Stops early once every pair has already exceeded delta (sups only
    grow), which is the common case while halving separations.
    """
    sup = np.linalg.norm(X - Y, axis=0)
    for stepper in (_apply_cols, _apply_inverse_cols):
        cx, cy = X, Y
        for _ in range(horizon):
            if np.all(sup >= delta):
                return sup
            cx, cy = stepper(sys2, cx), stepper(sys2, cy)
            sup = np.maximum(sup, np.linalg.norm(cx - cy, axis=0))
    return sup


def restricted_step(sys, frame, x, direction="forward"):
    """One restricted step: full-space image, projected back onto the plane.

    Returns (next unit point on the plane, off-plane residual of the raw
    image).  For an exactly invariant plane the projection is the identity,
    so this is the restriction homeomorphism of the invariant circle; the
    residual certifies the plane data at every step.
    """
    if direction == "forward":
        y = apply(sys, x)
    else:
        y = apply_inverse(sys, x)
    in_plane = frame @ (frame.T @ y)
    residual = float(np.linalg.norm(y - in_plane))
    return in_plane / np.linalg.norm(in_plane), residual


def _restricted_pair_sup(sys, frame, x, y, horizon):
    """Bi-orbit sup for an on-plane pair under the restriction, together
    with the worst per-step off-plane residual."""
    sup = float(np.linalg.norm(x - y))
    worst = 0.0
    for stepper in (_apply_cols, _apply_inverse_cols):
        cols = np.column_stack([x, y])
        for _ in range(horizon):
            raw = stepper(sys, cols)
            proj = frame @ (frame.T @ raw)
            worst = max(worst, float(np.max(np.linalg.norm(raw - proj, axis=0))))
            cols = proj / np.linalg.norm(proj, axis=0)
            sup = max(sup, float(np.linalg.norm(cols[:, 0] - cols[:, 1])))
    return sup, worst


def nonexpansive_witness(
    sys: AffineSphereSystem,
    delta: float = 0.01,
    horizon: int = 500,
    plane=None,
    seed: int = 42,
) -> certificates.Witness:
    """A pair on an invariant circle staying delta-close over the horizon.

    The dynamics is restricted to the circle cut by a T-invariant 2-plane
    through the offset (the restriction of a circle homeomorphism is never
    expansive, so such pairs exist).  Base points near an attracting fixed
    point, at the maximal-displacement angle, and at seeded uniform angles
    are paired at separations halving from delta (hard floor 1e-7); the
    first pair whose full-space bi-orbit stays below delta wins.
    """
    if not (sys.homeo_certified or sys.projective_mode):
        raise ValueError("non-expansivity witness needs a certified system")
    if plane is not None:
        frame = _validate_plane(sys, plane)
    else:
        frame = offset_invariant_plane(sys)
    sys2 = restricted_circle_system(sys, frame)
    if not (sys2.homeo_certified or sys2.projective_mode):
        raise WitnessNotFound(
            "restricted circle system lost certification (offset too close "
            "to the homeomorphism boundary)"
        )

    # candidate base angles: the maximal-displacement point is usually the
    # widest-gap location (the pair's own stretch is already the worst the
    # transit will see), then arcs near an attracting point, then seeded
    # uniform bases
    bases = []
    grid = np.arange(circle.N_SCAN) * (2 * math.pi / circle.N_SCAN)
    disp = np.abs(np.asarray(circle.angle_displacement(sys2, grid, 1)))
    bases.append(float(grid[int(np.argmax(disp))]))
    records = circle.fixed_points_numeric(sys2, 1)
    if not any(r.stability is circle.Stability.ATTRACTING for r in records):
        records += circle.fixed_points_numeric(sys2, 2)
    for rec in records:
        if rec.stability is circle.Stability.ATTRACTING:
            phi_a = math.atan2(rec.point[1], rec.point[0])
            bases.extend([phi_a + d for d in (0.6, -0.6, 0.2, -0.2, 0.05, -0.05)])
    rng = np.random.default_rng(seed)
    bases.extend(rng.uniform(0.0, 2 * math.pi, size=4).tolist())

    base_arr = np.asarray(bases)
    separation = float(delta)
    while separation >= 1e-7:
        gap = 2.0 * math.asin(min(separation / 2.0, 1.0))
        X = circle.circle_point(base_arr)
        Y = circle.circle_point(base_arr + gap)
        sup = _pair_sup_batch(sys2, X, Y, horizon, delta)
        hits = np.flatnonzero(sup < delta - 1e-12)
        for idx in hits:
            x, y = frame @ X[:, idx], frame @ Y[:, idx]
            sup_r, step_residual = _restricted_pair_sup(sys, frame, x, y, horizon)
            if sup_r < delta - 1e-12 and step_residual <= 1e-8:
                return certificates.Witness(
                    kind=certificates.NONEXPANSIVE_PAIR,
                    system=system_to_dict(sys),
                    data={
                        "x": [float(v) for v in x],
                        "y": [float(v) for v in y],
                        "delta": float(delta),
                        "horizon": int(horizon),
                        "sup_distance": sup_r,
                        "separation": float(np.linalg.norm(x - y)),
                        "plane": [[float(v) for v in frame[:, 0]],
                                  [float(v) for v in frame[:, 1]]],
                        "plane_residual": step_residual,
                    },
                    tolerance=float(delta),
                    seed=seed,
                )
        separation /= 2.0
    raise WitnessNotFound(
        f"no pair stayed below delta = {delta:g} down to separation 1e-7"
    )
